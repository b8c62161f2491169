import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from dualrec.dynamics import NO_REC, SystemState
from dualrec.errors import KTooLarge
from dualrec.policy import (
    PolicySpec,
    RecentLists,
    diversity_row,
    policy_rows,
    sample_assignment,
    sample_rows,
    softmax_row,
    topk_row,
    truncation_row,
    uniform_mix_row,
)
from dualrec.sphere import random_unit


def creators_with_scores(scores):
    """Two-dimensional creators whose inner products with (1, 0) are ``scores``."""
    s = np.asarray(scores, dtype=float)
    return np.column_stack([s, np.sqrt(1 - s**2)])


E1 = np.array([1.0, 0.0])


def random_state(rng, m, n, d):
    return SystemState(random_unit(rng, m, d), random_unit(rng, n, d))


def test_softmax_examples():
    np.testing.assert_allclose(softmax_row(E1, creators_with_scores([1.0, 0.0]), 1.0),
                               [0.7310585786300049, 0.2689414213699951], atol=1e-12)
    np.testing.assert_allclose(softmax_row(E1, creators_with_scores([0.9, -0.4, 0.1]), 0.0),
                               [1 / 3] * 3, atol=1e-15)
    p = softmax_row(E1, creators_with_scores([0.9, 0.1]), 1e6)
    assert np.all(np.isfinite(p)) and p[0] == 1.0


def test_topk_examples():
    V = creators_with_scores([0.1, 0.9, 0.5, 0.9])
    p = topk_row(E1, V, 2, 1.0)
    np.testing.assert_allclose(p, [0, 0.5, 0, 0.5], atol=1e-15)
    # tie at the cut goes to the lower index
    p = topk_row(E1, creators_with_scores([0.5, 0.9, 0.5]), 2, 1.0)
    assert p[0] > 0 and p[2] == 0
    np.testing.assert_allclose(topk_row(E1, V, 4, 1.3), softmax_row(E1, V, 1.3), atol=1e-15)
    np.testing.assert_array_equal(topk_row(E1, V, 1, 0.0), [0, 1, 0, 0])
    with pytest.raises(KTooLarge):
        topk_row(E1, V, 5, 1.0)


def test_truncation_examples():
    V = creators_with_scores([0.9, 0.3])
    np.testing.assert_array_equal(truncation_row(E1, V, 0.5, 0.0), [1, 0])
    np.testing.assert_allclose(truncation_row(E1, V, -1.0, 2.0), softmax_row(E1, V, 2.0), atol=1e-15)
    assert truncation_row(E1, V, 0.99, 1.0) is None


def test_diversity_examples(rng):
    V = np.array([[1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_allclose(diversity_row(E1, V, [0], 1.0, 1.0), [0.5, 0.5], atol=1e-15)
    W = random_unit(rng, 6, 4)
    u = random_unit(rng, 1, 4)[0]
    np.testing.assert_allclose(diversity_row(u, W, [], 3.0, 1.5), softmax_row(u, W, 1.5), atol=1e-15)
    np.testing.assert_allclose(diversity_row(u, W, [1, 2, 2], 0.0, 1.5), softmax_row(u, W, 1.5), atol=1e-15)


def test_uniform_mix_examples():
    np.testing.assert_allclose(uniform_mix_row([1.0, 0.0], 0.1), [0.95, 0.05], atol=1e-15)
    np.testing.assert_array_equal(uniform_mix_row([0.2, 0.8], 0.0), [0.2, 0.8])
    np.testing.assert_allclose(uniform_mix_row([0.2, 0.3, 0.5], 1.0), [1 / 3] * 3, atol=1e-15)


def test_spec_validation():
    with pytest.raises(ValueError):
        PolicySpec("topk")
    with pytest.raises(ValueError):
        PolicySpec("softmax", k=3)
    with pytest.raises(ValueError):
        PolicySpec("softmax", beta=-1.0)
    with pytest.raises(ValueError):
        PolicySpec("truncation", tau=1.5)
    with pytest.raises(ValueError):
        PolicySpec("uniform_mix", eps=1.1)
    with pytest.raises(ValueError):
        PolicySpec("topk", k=0)
    assert PolicySpec("diversity", rho=1.0).list_len == 10
    assert PolicySpec("topk", k=5).label() == "topk(beta=1.0, k=5)"


SPECS = [
    PolicySpec(),
    PolicySpec(beta=4.0),
    PolicySpec("topk", k=3),
    PolicySpec("topk", beta=0.0, k=1),
    PolicySpec("truncation", tau=0.3),
    PolicySpec("truncation", beta=2.0, tau=-0.2),
    PolicySpec("uniform_mix", eps=0.2),
    PolicySpec("diversity", rho=0.7),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.label())
def test_batched_rows_match_single_user_rows(rng, spec):
    for _ in range(10):
        m, n = rng.integers(1, 9), rng.integers(3, 8)
        state = random_state(rng, m, n, 4)
        recents = RecentLists(m, 4)
        for _ in range(rng.integers(0, 7)):
            recents.push(rng.integers(-1, n, m))
        rows = policy_rows(state, spec, recents)
        U, V = state.users, state.creators
        for j in range(m):
            if spec.kind == "softmax":
                ref = softmax_row(U[j], V, spec.beta)
            elif spec.kind == "topk":
                ref = topk_row(U[j], V, spec.k, spec.beta)
            elif spec.kind == "truncation":
                ref = truncation_row(U[j], V, spec.tau, spec.beta)
                ref = np.zeros(n) if ref is None else ref
            elif spec.kind == "uniform_mix":
                ref = uniform_mix_row(softmax_row(U[j], V, spec.beta), spec.eps)
            else:
                ref = diversity_row(U[j], V, recents.user(j), spec.rho, spec.beta)
            np.testing.assert_allclose(rows[j], ref, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), beta=st.floats(0, 20), spec_index=st.integers(0, len(SPECS) - 1))
def test_rows_are_distributions(seed, beta, spec_index):
    rng = np.random.default_rng(seed)
    state = random_state(rng, 7, 6, 3)
    base = SPECS[spec_index]
    spec = PolicySpec(base.kind, beta, base.k, base.tau, base.rho, base.list_len, base.eps)
    recents = RecentLists(7, 3)
    recents.push(rng.integers(0, 6, 7))
    rows = policy_rows(state, spec, recents)
    assert np.all(rows >= 0)
    sums = rows.sum(axis=1)
    served = sums > 0
    np.testing.assert_allclose(sums[served], 1.0, atol=1e-12)
    if spec.kind == "truncation":
        S = state.users @ state.creators.T
        assert np.all(rows[S < spec.tau] == 0)
        np.testing.assert_array_equal(served, np.any(S >= spec.tau, axis=1))
    else:
        assert np.all(served)
    if spec.kind == "topk":
        assert np.all(np.count_nonzero(rows, axis=1) <= spec.k)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), beta=st.floats(0, 10))
def test_softmax_lower_bound_and_order(seed, beta):
    rng = np.random.default_rng(seed)
    state = random_state(rng, 10, 8, 5)
    rows = policy_rows(state, PolicySpec(beta=beta))
    assert np.all(rows >= np.exp(-2 * beta) / 8 * (1 - 1e-12))
    S = state.users @ state.creators.T
    if beta > 0:
        for j in range(10):
            order = np.argsort(S[j])
            gaps = np.diff(S[j][order])
            strict = beta * gaps > 1e-9  # logit gap resolvable in float64
            assert np.all(np.diff(rows[j][order])[strict] > 0)


def test_topk_support_size(rng):
    state = random_state(rng, 20, 9, 4)
    for k in range(1, 10):
        rows = policy_rows(state, PolicySpec("topk", k=k))
        assert np.all(np.count_nonzero(rows, axis=1) == k)
    with pytest.raises(KTooLarge):
        policy_rows(state, PolicySpec("topk", k=10))


def test_sample_rows_inverse_cdf():
    rows = np.array([[0.2, 0.3, 0.5], [0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.5, 0.5, 0.0]])
    a = sample_rows(rows, np.array([0.25, 0.5, 0.999, 0.9999999999999999]))
    np.testing.assert_array_equal(a, [1, NO_REC, 1, 1])
    np.testing.assert_array_equal(sample_rows(rows[:1], [0.0]), [0])


def test_sampling_frequencies_chi_square():
    rng = np.random.default_rng(7)
    p = np.array([0.05, 0.1, 0.15, 0.3, 0.4])
    draws = sample_rows(np.tile(p, (100_000, 1)), rng.random(100_000))
    counts = np.bincount(draws, minlength=5)
    assert stats.chisquare(counts, 100_000 * p).pvalue > 0.001


def test_sample_assignment_frequencies_chi_square(rng):
    state = random_state(rng, 1, 6, 3)
    spec = PolicySpec(beta=2.0)
    p = policy_rows(state, spec)[0]
    gen = np.random.default_rng(11)
    draws = np.array([sample_assignment(state, spec, None, gen)[0] for _ in range(100_000)])
    counts = np.bincount(draws, minlength=6)
    assert stats.chisquare(counts, 100_000 * p).pvalue > 0.001


def test_sample_assignment_contracts(rng):
    state = random_state(rng, 30, 5, 4)
    spec = PolicySpec(beta=1e6)
    a = sample_assignment(state, spec, None, np.random.default_rng(0))
    np.testing.assert_array_equal(a, np.argmax(state.users @ state.creators.T, axis=1))
    single = SystemState(state.users, state.creators[:1])
    np.testing.assert_array_equal(sample_assignment(single, PolicySpec(), None, rng), 0)
    one = sample_assignment(state, PolicySpec(), None, np.random.default_rng(5))
    two = sample_assignment(state, PolicySpec(), None, np.random.default_rng(5))
    np.testing.assert_array_equal(one, two)
    recents = RecentLists(30, 10)
    a = sample_assignment(state, PolicySpec("truncation", tau=0.999), recents, rng)
    assert np.all(a == NO_REC)
    assert recents.user(0) == []


def test_recent_lists_ring_buffer():
    r = RecentLists(2, 3)
    for step in ([0, 1], [2, NO_REC], [3, 4], [5, 6]):
        r.push(step)
    assert r.user(0) == [2, 3, 5]
    assert r.user(1) == [4, 6]
    np.testing.assert_array_equal(r.counts(7), [[0, 0, 1, 1, 0, 1, 0], [0, 0, 0, 0, 1, 0, 1]])
    c = r.copy()
    c.push([0, 0])
    assert r.user(0) == [2, 3, 5] and c.user(0) == [3, 5, 0]
