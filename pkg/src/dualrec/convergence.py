"""Polarization and cluster detectors, plus numerical oracles for the step lemmas.

Detectors are sound: a positive report has been re-checked by direct
distance computation against the reported centers.  They are only
heuristically complete.  A center is first guessed as the projected mean
and, if that misses, refined by maximizing the smallest inner product
with the group (the best unit center in the minimax sense).

Oracles draw random instances satisfying a lemma's hypotheses and count
instances where the conclusion fails by more than ``SLACK``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .dynamics import RateSpec, SystemState, step
from .errors import OracleViolation, ZeroVector
from .impact import CreatorImpact, UserImpact
from .policy import PolicySpec, policy_rows, sample_rows
from .sphere import project, project_rows, random_unit, random_within

SLACK = 1e-9


@dataclass
class PolarizationReport:
    kind: str  # "consensus", "bipolar", "clusters" or "none"
    centers: list = field(default_factory=list)
    radius: float = 0.0
    max_residual: float = math.inf
    labels: np.ndarray | None = None  # cluster index of every vector (users first)

    @property
    def q(self):
        return len(self.centers) if self.kind != "none" else 0

    def __bool__(self):
        return self.kind != "none"


def _residual(X, c):
    return float(np.max(np.linalg.norm(X - c, axis=1)))


def _minimax_center(X, start):
    """Unit ``c`` maximizing ``min_i <x_i, c>``, i.e. minimizing the largest chord."""
    d = X.shape[1]
    x0 = np.append(start, np.min(X @ start))
    cons = [
        {"type": "ineq", "fun": lambda z: X @ z[:d] - z[d],
         "jac": lambda z: np.hstack([X, -np.ones((len(X), 1))])},
        {"type": "ineq", "fun": lambda z: 1.0 - z[:d] @ z[:d],
         "jac": lambda z: np.append(-2.0 * z[:d], 0.0)},
    ]
    res = minimize(lambda z: -z[d], x0, jac=lambda z: np.append(np.zeros(d), -1.0),
                   constraints=cons, method="SLSQP", options={"maxiter": 200, "ftol": 1e-14})
    try:
        return project(res.x[:d])
    except ZeroVector:
        return start


def _center(X, R):
    """Best-effort unit center of the rows of ``X`` and its residual."""
    c = project(X.mean(axis=0))
    r = _residual(X, c)
    if r > R:
        refined = _minimax_center(X, c)
        r2 = _residual(X, refined)
        if r2 < r:
            c, r = refined, r2
    return c, r


def detect_consensus(state, R):
    if R <= 0:
        raise ValueError("R must be positive")
    X = state.all_vectors()
    try:
        c, r = _center(X, R)
    except ZeroVector:
        return PolarizationReport("none", radius=R)
    if r <= R:
        return PolarizationReport("consensus", [c], R, r, np.zeros(len(X), dtype=int))
    return PolarizationReport("none", radius=R, max_residual=r)


def detect_bipolarization(state, R):
    """Align every vector with the first creator by sign, then look for one center."""
    if R <= 0:
        raise ValueError("R must be positive")
    X = state.all_vectors()
    ref = state.creators[0]
    signs = np.where(X @ ref < 0, -1.0, 1.0)
    aligned = X * signs[:, None]
    try:
        c, r = _center(aligned, R)
    except ZeroVector:
        return PolarizationReport("none", radius=R)
    if r <= R:
        labels = (signs < 0).astype(int)
        return PolarizationReport("bipolar", [c, -c], R, r, labels)
    return PolarizationReport("none", radius=R, max_residual=r)


def _min_gap(C):
    gaps = np.linalg.norm(C[:, None] - C[None, :], axis=-1)
    np.fill_diagonal(gaps, np.inf)
    return float(gaps.min())


def detect_clusters(state, R):
    """Greedy leader grouping at radius ``2R``, then a center per group.

    Positive only if every vector lies within ``R`` of its group's center,
    the centers are more than ``4R`` apart (disjoint ``2R``-balls), and
    every group holds at least one creator; isolated users do not count as
    clusters.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    X = state.all_vectors()
    leaders, labels = [], np.empty(len(X), dtype=int)
    for i, x in enumerate(X):
        if leaders:
            dist = np.linalg.norm(X[leaders] - x, axis=1)
            near = int(np.argmin(dist))
            if dist[near] <= 2 * R:
                labels[i] = near
                continue
        labels[i] = len(leaders)
        leaders.append(i)
    q = len(leaders)
    has_creator = np.zeros(q, dtype=bool)
    has_creator[labels[state.m:]] = True
    if not has_creator.all():
        return PolarizationReport("none", radius=R)
    centers, worst = [], 0.0
    for ell in range(q):
        c, r = _center(X[labels == ell], R)
        if r > R:
            return PolarizationReport("none", radius=R, max_residual=r)
        centers.append(c)
        worst = max(worst, r)
    C = np.array(centers)
    if q > 1 and _min_gap(C) <= 4 * R:
        return PolarizationReport("none", radius=R, max_residual=worst)
    return PolarizationReport("clusters", centers, R, worst, labels)


def certify_bipolar(state, c, R):
    """Largest distance from any vector to the nearer of ``+c`` and ``-c``."""
    X = state.all_vectors()
    return float(np.max(np.minimum(np.linalg.norm(X - c, axis=1), np.linalg.norm(X + c, axis=1))))


# oracles


@dataclass
class OracleReport:
    name: str
    trials: int
    violations: int = 0
    worst_margin: float = -math.inf  # largest (conclusion side - allowed side); <= SLACK is a pass
    counterexample: dict | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.violations == 0

    def record(self, margin, instance):
        if margin > self.worst_margin:
            self.worst_margin = float(margin)
        if margin > SLACK:
            self.violations += 1
            if self.counterexample is None:
                self.counterexample = instance

    def raise_if_failed(self):
        if not self.passed:
            raise OracleViolation(
                f"{self.name}: {self.violations}/{self.trials} violations", self.counterexample)
        return self


def convex_cone_instance(z, a, y):
    """Both convex-cone inequalities for ``x = P(sum a_i z_i)``.

    Returns ``(<x,y>, min <z_i,y>, |x-y|, max |z_i-y|)``; the lemma says
    the first entry is at least the second and the third at most the fourth.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    a = np.asarray(a, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(a < 0):
        raise ValueError("weights must be nonnegative")
    if not np.all(z @ y > 0):
        raise ValueError("every z_i needs a positive inner product with y")
    x = project(a @ z)  # all-zero weights raise ZeroVector
    return (float(x @ y), float(np.min(z @ y)),
            float(np.linalg.norm(x - y)), float(np.max(np.linalg.norm(z - y, axis=1))))


def oracle_convex_cone(trials, rng, strict=False):
    report = OracleReport("convex_cone", trials)
    for _ in range(trials):
        d = int(rng.integers(2, 11))
        k = int(rng.integers(1, 6))
        y = random_unit(rng, 1, d)[0]
        z = random_unit(rng, k, d)
        s = z @ y
        z[s < 0] *= -1
        if np.any(z @ y == 0):
            continue
        a = rng.exponential(size=k) * (rng.random(k) < 0.8)
        if not a.any():
            a[int(rng.integers(k))] = 1.0
        ip, ip_min, dist, dist_max = convex_cone_instance(z, a, y)
        instance = {"z": z, "a": a, "y": y}
        report.record(max(ip_min - ip, dist - dist_max), instance)
    return report.raise_if_failed() if strict else report


def update_bounds_instance(x, z, y, eta):
    """Slack of the three step inequalities for ``x' = P(x + eta z)``.

    Returns margins that are <= 0 when the bound holds:
    displacement vs ``eta |z|``, ``<x'-x, z>`` vs ``|x'-x|^2 / eta``, and
    ``<x'-x, y>`` vs ``eta/(1+eta|z|) (<z,y> - |z| <x,y>)``.
    """
    x, z, y = (np.asarray(v, dtype=float) for v in (x, z, y))
    x_new = project(x + eta * z)
    dx = x_new - x
    zn = np.linalg.norm(z)
    step_len = np.linalg.norm(dx)
    m1 = step_len - eta * zn
    m2 = (dx @ dx) / eta - dx @ z
    m3 = eta / (1 + eta * zn) * (z @ y - zn * (x @ y)) - dx @ y
    return float(m1), float(m2), float(m3)


def oracle_update_bounds(trials, rng, strict=False):
    report = OracleReport("update_bounds", trials)
    for _ in range(trials):
        d = int(rng.integers(2, 11))
        x = random_unit(rng, 1, d)[0]
        z = random_unit(rng, 1, d)[0] * rng.uniform(0.0, 1.0)
        if x @ z < 0:
            z = -z
        y = rng.standard_normal(d) * rng.uniform(0.0, 2.0)
        # y needs nonnegative inner products with both x and z
        for _ in range(50):
            if x @ y >= 0 and z @ y >= 0:
                break
            y = rng.standard_normal(d)
        else:
            y = x + z
        eta = float(rng.uniform(1e-3, 1.0))
        margins = update_bounds_instance(x, z, y, eta)
        report.record(max(margins), {"x": x, "z": z, "y": y, "eta": eta})
    return report.raise_if_failed() if strict else report


def single_creator_steps(eta_u, L_f, J_size, R):
    """Steps after which the single-creator potential bound guarantees ``sum |u_j - v|^2 <= R^2``."""
    return max(0, math.ceil(8.0 / (3.0 * eta_u * L_f) * math.log(2.0 * J_size / R**2)))


def oracle_single_creator_bound(instances, J_size, R, rng, eta_u=0.4, L_f=0.5, eta_c=None,
                                d=10, extra_steps=None, bipolar=False, strict=False):
    """One creator shown to ``J_size`` users every step.

    With ``bipolar=False`` every user starts on the creator's side and the
    oracle checks ``sum_j |u_j - v|^2 <= R^2`` at the guaranteed step and at
    every step of a further window.  With ``bipolar=True`` users start on
    both sides and the check is ``R``-bi-polarization around the creator.
    """
    if eta_c is None:
        eta_c = eta_u * L_f / 2
    if not (eta_u < 0.5 and eta_c <= eta_u * L_f / 2 + 1e-15):
        raise ValueError("need eta_u < 1/2 and eta_c <= eta_u * L_f / 2")
    f = UserImpact("sign_affine", a=L_f, b=1.0 - L_f)
    g = CreatorImpact()
    rates = RateSpec(eta_u, eta_c)
    T = single_creator_steps(eta_u, L_f, J_size, R)
    extra = T if extra_steps is None else extra_steps
    name = "single_creator_bipolar" if bipolar else "single_creator_bound"
    report = OracleReport(name, instances, details={"T": T})
    zeros = np.zeros(J_size, dtype=np.int64)
    for _ in range(instances):
        v = random_unit(rng, 1, d)
        U = random_unit(rng, J_size, d)
        signs = np.where(U @ v[0] < 0, -1.0, 1.0)
        if not bipolar:
            U = U * signs[:, None]
        state = SystemState(U, v)
        initial = state
        worst = -math.inf
        for t in range(T + extra + 1):
            if t >= T:
                if bipolar:
                    worst = max(worst, certify_bipolar(state, state.creators[0], R) - R)
                else:
                    gap = np.sum((state.users - state.creators[0]) ** 2) - R**2
                    worst = max(worst, gap)
            state = step(state, zeros, f, g, rates)
        report.record(worst, {"users": initial.users, "creator": initial.creators[0]})
    return report.raise_if_failed() if strict else report


def construct_bipolar(rng, n, m, d, R, consensus=False):
    """Random ``(R, c)``-bi-polarized state with both poles occupied (unless ``consensus``)."""
    c = random_unit(rng, 1, d)[0]
    X = random_within(rng, c, R, n + m) if R > 0 else np.tile(c, (n + m, 1))
    if not consensus:
        signs = rng.choice([-1.0, 1.0], size=n + m)
        signs[0], signs[-1] = 1.0, -1.0
        X = X * signs[:, None]
    return SystemState(X[:m], X[m:]), c


def check_absorbing_bipolar(n, m, d, R, steps, rng, constructions=1, beta=1.0,
                            f=None, rates=None, consensus=False, strict=False):
    """Run softmax dynamics from constructed bi-polarized states; count escapes.

    The state must stay within ``R`` of ``+c`` or ``-c`` for the same ``c``
    used to build it, at every step.
    """
    if not 0 <= R <= 1:
        raise ValueError("R must lie in [0, 1]")
    f = f or UserImpact("sign_affine", a=0.5, b=0.5)
    rates = rates or RateSpec(0.4, 0.1)
    g = CreatorImpact()
    policy = PolicySpec("softmax", beta=beta)
    name = "absorbing_consensus" if consensus else "absorbing_bipolar"
    report = OracleReport(name, constructions)
    for _ in range(constructions):
        state, c = construct_bipolar(rng, n, m, d, R, consensus)
        worst = certify_bipolar(state, c, R) - R
        if consensus:
            worst = max(worst, _residual(state.all_vectors(), c) - R)
        for _ in range(steps):
            a = sample_rows(policy_rows(state, policy), rng.random(m))
            state = step(state, a, f, g, rates)
            if consensus:
                worst = max(worst, _residual(state.all_vectors(), c) - R)
            else:
                worst = max(worst, certify_bipolar(state, c, R) - R)
        report.record(worst, {"c": c})
    return report.raise_if_failed() if strict else report


def construct_clusters(rng, n, m, d, k, R):
    """``n // k`` balls of radius ``R`` with disjoint ``2R``-balls, ``k`` creators each.

    Leftover creators (``n mod k``) go to the first balls; every ball gets at
    least one user when ``m`` allows.  Returns the state, centers and the
    ball index of every vector (users first).
    """
    q = n // k
    if q < 1:
        raise ValueError("need k <= n")
    for _ in range(1000):
        C = random_unit(rng, q, d)
        if q == 1 or _min_gap(C) > 4 * R + 1e-6:
            break
    else:
        raise ValueError("could not place separated centers; lower R or q")
    creator_ball = np.concatenate([np.repeat(np.arange(q), k), np.arange(n - q * k) % q])
    user_ball = np.concatenate([np.arange(min(q, m)), rng.integers(0, q, size=max(0, m - q))])
    labels = np.concatenate([user_ball, creator_ball])
    X = np.empty((n + m, d))
    for ell in range(q):
        idx = np.flatnonzero(labels == ell)
        X[idx] = random_within(rng, C[ell], R, idx.size)
    return SystemState(X[:m], X[m:]), C, labels


def _same_partition(a, b):
    """True if label arrays ``a`` and ``b`` group the items identically."""
    pairs = set(zip(a.tolist(), b.tolist()))
    return len(pairs) == len(set(a.tolist())) == len(set(b.tolist()))


def check_absorbing_clusters(n, m, d, k, R, steps, rng, constructions=1, beta=1.0,
                             f=None, rates=None, strict=False):
    """Top-``k`` dynamics from constructed ``n // k``-cluster states.

    Each step the detector must find exactly ``n // k`` clusters with the
    constructed membership, and every vector must stay within ``R`` of
    its constructed center.
    """
    f = f or UserImpact("sign_affine", a=0.5, b=0.5)
    rates = rates or RateSpec(0.4, 0.1)
    g = CreatorImpact()
    policy = PolicySpec("topk", beta=beta, k=k)
    q = n // k
    report = OracleReport("absorbing_clusters", constructions, details={"q": q})
    for _ in range(constructions):
        state, C, labels = construct_clusters(rng, n, m, d, k, R)
        failures = 0
        worst = -math.inf
        for t in range(steps + 1):
            if t:
                a = sample_rows(policy_rows(state, policy), rng.random(m))
                state = step(state, a, f, g, rates)
            X = state.all_vectors()
            worst = max(worst, float(np.max(np.linalg.norm(X - C[labels], axis=1))) - R)
            found = detect_clusters(state, R)
            if found.q != q or not _same_partition(found.labels, labels):
                failures += 1
        report.record(worst if failures == 0 else math.inf, {"centers": C, "labels": labels})
        report.details.setdefault("detector_failures", 0)
        report.details["detector_failures"] += failures
    return report.raise_if_failed() if strict else report
