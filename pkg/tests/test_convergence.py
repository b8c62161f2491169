import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualrec.convergence import (
    OracleReport,
    check_absorbing_bipolar,
    check_absorbing_clusters,
    construct_bipolar,
    construct_clusters,
    convex_cone_instance,
    detect_bipolarization,
    detect_clusters,
    detect_consensus,
    oracle_convex_cone,
    oracle_single_creator_bound,
    oracle_update_bounds,
    single_creator_steps,
    update_bounds_instance,
)
from dualrec.dynamics import RateSpec, SystemState, step
from dualrec.errors import OracleViolation, ZeroVector
from dualrec.impact import CreatorImpact, UserImpact
from dualrec.sphere import random_unit, random_within


def split(X, m):
    return SystemState(X[:m], X[m:])


def assert_sound(report, state):
    """Re-check a positive report by direct distances."""
    X = state.all_vectors()
    if report.kind == "consensus":
        assert np.max(np.linalg.norm(X - report.centers[0], axis=1)) <= report.radius
    elif report.kind == "bipolar":
        c = report.centers[0]
        near = np.minimum(np.linalg.norm(X - c, axis=1), np.linalg.norm(X + c, axis=1))
        assert np.max(near) <= report.radius
    elif report.kind == "clusters":
        C = np.array(report.centers)
        assert np.max(np.linalg.norm(X - C[report.labels], axis=1)) <= report.radius
        if len(C) > 1:
            gaps = np.linalg.norm(C[:, None] - C[None], axis=-1)
            assert np.min(gaps[~np.eye(len(C), dtype=bool)]) > 4 * report.radius


def test_consensus_examples(rng):
    c = random_unit(rng, 1, 5)[0]
    same = SystemState(np.tile(c, (4, 1)), np.tile(c, (3, 1)))
    rep = detect_consensus(same, 1e-6)
    assert rep.kind == "consensus" and rep.max_residual <= 1e-15
    near = split(random_within(rng, c, 0.05, 9), 5)
    rep = detect_consensus(near, 0.1)
    assert rep and rep.max_residual <= 0.1
    assert_sound(rep, near)
    poles = SystemState(np.array([c, -c]), np.array([c, -c]))
    assert not detect_consensus(poles, 1.0)


def test_bipolar_examples(rng):
    c = random_unit(rng, 1, 4)[0]
    poles = SystemState(np.array([c, -c, -c]), np.array([-c, c]))
    rep = detect_bipolarization(poles, 0.01)
    assert rep.kind == "bipolar" and rep.max_residual <= 1e-15
    state, c = construct_bipolar(rng, 6, 10, 4, 0.1)
    rep = detect_bipolarization(state, 0.1)
    assert rep
    assert_sound(rep, state)
    assert not detect_bipolarization(SystemState(np.eye(5)[:2], np.eye(5)), 0.1)


def test_clusters_examples(rng):
    state, C, labels = construct_clusters(rng, 12, 9, 6, 3, 0.05)
    rep = detect_clusters(state, 0.05)
    assert rep.q == 4
    assert_sound(rep, state)
    one, _, _ = construct_clusters(rng, 5, 5, 6, 5, 0.05)
    assert detect_clusters(one, 0.05).q == 1
    for seed in range(20):
        r = np.random.default_rng(seed)
        assert not detect_clusters(SystemState(random_unit(r, 100, 10), random_unit(r, 50, 10)), 0.05)


def test_clusters_need_a_creator_each():
    state = SystemState(np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([[1.0, 0.0]]))
    assert not detect_clusters(state, 0.05)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), R=st.floats(0.01, 0.5), noise=st.floats(0.0, 0.6))
def test_detectors_sound_and_nested(seed, R, noise):
    rng = np.random.default_rng(seed)
    state, _ = construct_bipolar(rng, 4, 6, 3, noise, consensus=bool(seed % 2))
    for detect in (detect_consensus, detect_bipolarization, detect_clusters):
        assert_sound(detect(state, R), state)
    if detect_consensus(state, R):
        assert detect_bipolarization(state, R)


def test_detectors_reject_bad_radius(rng):
    state = SystemState(random_unit(rng, 2, 3), random_unit(rng, 2, 3))
    for detect in (detect_consensus, detect_bipolarization, detect_clusters):
        with pytest.raises(ValueError):
            detect(state, 0.0)


def test_convex_cone_instance_examples(rng):
    z = random_unit(rng, 1, 4)
    y = z[0]
    ip, ip_min, dist, dist_max = convex_cone_instance(z, [1.0], y)
    assert ip == pytest.approx(ip_min, abs=1e-15) and dist == pytest.approx(dist_max, abs=1e-15)
    with pytest.raises(ZeroVector):
        convex_cone_instance(np.eye(3)[:2], [0.0, 0.0], np.ones(3) / np.sqrt(3))


def test_update_bounds_instance_examples(rng):
    x = random_unit(rng, 1, 5)[0]
    m = update_bounds_instance(x, x, x, 0.3)
    assert max(m) <= 1e-15
    z = 0.8 * random_unit(rng, 1, 5)[0]
    z = z if z @ x >= 0 else -z
    for eta in (1e-2, 1e-4, 1e-6):
        x_new_gap = update_bounds_instance(x, z, x + z, eta)[0]
        assert x_new_gap <= 1e-12


def test_oracles_small_runs(rng):
    for report in (oracle_convex_cone(3000, rng), oracle_update_bounds(3000, rng)):
        assert report.passed, report.counterexample
        assert report.worst_margin <= 1e-9


def test_single_creator_steps():
    assert single_creator_steps(0.4, 0.5, 20, 0.1) == 111
    assert single_creator_steps(0.4, 0.5, 20, 0.1) == math.ceil(8 / 0.6 * math.log(4000))


def test_single_creator_start_at_creator(rng):
    v = random_unit(rng, 1, 6)
    state = SystemState(v.copy(), v)
    f = UserImpact("sign_affine", 0.5, 0.5)
    for _ in range(20):
        state = step(state, [0], f, CreatorImpact(), RateSpec(0.4, 0.1))
        assert np.sum((state.users - state.creators[0]) ** 2) <= 1e-20


def test_single_creator_oracle(rng):
    report = oracle_single_creator_bound(8, 20, 0.1, rng)
    assert report.passed and report.details["T"] == 111
    assert oracle_single_creator_bound(8, 20, 0.1, rng, bipolar=True).passed
    with pytest.raises(ValueError):
        oracle_single_creator_bound(1, 20, 0.1, rng, eta_u=0.4, eta_c=0.2)


def test_absorbing_bipolar(rng):
    assert check_absorbing_bipolar(6, 10, 4, 0.0, 50, rng).worst_margin <= 1e-12
    assert check_absorbing_bipolar(20, 40, 10, 0.1, 60, rng, constructions=3).passed
    assert check_absorbing_bipolar(20, 40, 10, 0.1, 60, rng, constructions=2, consensus=True).passed


def test_absorbing_clusters(rng):
    r = check_absorbing_clusters(50, 100, 10, 10, 0.05, 60, rng, constructions=2)
    assert r.passed and r.details == {"q": 5, "detector_failures": 0}
    assert check_absorbing_clusters(6, 12, 10, 6, 0.05, 40, rng).passed
    r = check_absorbing_clusters(8, 16, 10, 1, 0.05, 40, rng)
    assert r.passed and r.details["q"] == 8


def test_strict_reports_raise():
    report = OracleReport("toy", 2)
    report.record(-1.0, {"ok": True})
    report.raise_if_failed()
    report.record(1.0, {"bad": True})
    with pytest.raises(OracleViolation) as err:
        report.raise_if_failed()
    assert err.value.instance == {"bad": True}
