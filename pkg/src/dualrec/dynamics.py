"""User and creator update rules and the synchronous population step."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTail, DimensionMismatch, ZeroVector
from .sphere import ZERO_NORM, UNIT_TOL, inner, project, project_rows

NO_REC = -1  # assignment entry for a user who receives no recommendation


@dataclass(frozen=True)
class SystemState:
    users: np.ndarray     # (m, d)
    creators: np.ndarray  # (n, d)
    time: int = 0

    def __post_init__(self):
        users = np.array(self.users, dtype=float, ndmin=2)
        creators = np.array(self.creators, dtype=float, ndmin=2)
        if users.shape[1] != creators.shape[1]:
            raise DimensionMismatch(
                f"users have d={users.shape[1]}, creators d={creators.shape[1]}")
        if users.shape[1] < 2:
            raise DimensionMismatch("dimension must be at least 2")
        if len(users) < 1 or len(creators) < 1:
            raise ValueError("need at least one user and one creator")
        if self.time < 0:
            raise ValueError("time must be nonnegative")
        for name, X in (("users", users), ("creators", creators)):
            dev = np.abs(np.linalg.norm(X, axis=1) - 1.0)
            if np.any(dev > UNIT_TOL):
                raise ValueError(f"{name}[{int(np.argmax(dev))}] is not unit norm")
        users.flags.writeable = False
        creators.flags.writeable = False
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "creators", creators)

    @property
    def m(self):
        return self.users.shape[0]

    @property
    def n(self):
        return self.creators.shape[0]

    @property
    def d(self):
        return self.users.shape[1]

    def all_vectors(self):
        return np.vstack([self.users, self.creators])


@dataclass(frozen=True)
class RateSpec:
    eta_u: float = 0.1
    eta_c: float = 0.1
    fixed_dims: int = 0

    def __post_init__(self):
        for name in ("eta_u", "eta_c"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and positive, got {value}")
        if self.fixed_dims < 0:
            raise ValueError("fixed_dims must be nonnegative")


def user_update(u, v, f, eta_u):
    """One user step towards (or away from) the recommended creator ``v``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    weight = eta_u * f(inner(v, u))
    return project(u + weight * v)


def user_update_fixed(u, v, f, eta_u, k):
    """User step with the first ``k`` coordinates frozen.

    ``f`` sees the full vectors; only the tail moves, and it keeps its
    norm so the whole vector stays on the sphere.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if not 0 <= k < u.shape[0]:
        raise ValueError(f"fixed dims k={k} outside [0, {u.shape[0]})")
    if k == 0:
        return user_update(u, v, f, eta_u)
    tail = u[k:]
    tail_norm = np.linalg.norm(tail)
    if tail_norm <= ZERO_NORM:
        raise DegenerateTail("free coordinates of the user vector vanished")
    weight = eta_u * f(inner(v, u))
    out = u.copy()
    out[k:] = tail_norm * project(tail + weight * v[k:])
    return out


def creator_update(v, audience, g, eta_c):
    """Move creator ``v`` by the mean signed pull of its audience (no-op if empty)."""
    v = np.asarray(v, dtype=float)
    audience = np.asarray(audience, dtype=float).reshape(-1, v.shape[0])
    if len(audience) == 0:
        return v.copy()
    pulls = g(audience @ v)
    return project(v + eta_c * (pulls @ audience) / len(audience))


def step(state, assignment, f, g, rates):
    """Advance the whole population by one synchronous step.

    ``assignment[j]`` is the creator recommended to user ``j`` or
    ``NO_REC``.  Every update reads only time-``t`` vectors.
    """
    a = np.asarray(assignment, dtype=np.int64)
    U, V = state.users, state.creators
    m, d = U.shape
    n = V.shape[0]
    if a.shape != (m,):
        raise ValueError(f"assignment has shape {a.shape}, expected ({m},)")
    if np.any((a < NO_REC) | (a >= n)):
        raise ValueError("assignment index out of range")
    k = rates.fixed_dims
    if k >= d:
        raise ValueError(f"fixed_dims={k} must be < d={d}")

    served = np.flatnonzero(a != NO_REC)
    new_U = U.copy()
    new_V = V.copy()
    if served.size:
        Us = U[served]
        Vs = V[a[served]]
        s = np.einsum("ij,ij->i", Us, Vs)

        weight = rates.eta_u * f(s)
        if k == 0:
            raw = Us + weight[:, None] * Vs
            norms = np.linalg.norm(raw, axis=1)
            _raise_if_zero(norms, served, "user")
            new_U[served] = raw / norms[:, None]
        else:
            tail = Us[:, k:]
            tail_norm = np.linalg.norm(tail, axis=1)
            bad = np.flatnonzero(tail_norm <= ZERO_NORM)
            if bad.size:
                raise DegenerateTail(f"user {int(served[bad[0]])}: free coordinates vanished")
            raw = tail + weight[:, None] * Vs[:, k:]
            norms = np.linalg.norm(raw, axis=1)
            _raise_if_zero(norms, served, "user")
            new_U[served, k:] = raw * (tail_norm / norms)[:, None]

        pull = g(s)[:, None] * Us
        total = np.zeros((n, d))
        np.add.at(total, a[served], pull)
        counts = np.bincount(a[served], minlength=n)
        moved = np.flatnonzero(counts)
        raw = V[moved] + rates.eta_c * total[moved] / counts[moved, None]
        norms = np.linalg.norm(raw, axis=1)
        _raise_if_zero(norms, moved, "creator")
        new_V[moved] = raw / norms[:, None]

    return SystemState(new_U, new_V, state.time + 1)


def _raise_if_zero(norms, index, role):
    bad = np.flatnonzero(norms <= ZERO_NORM)
    if bad.size:
        raise ZeroVector(f"{role} update vanished before projection", index=int(index[bad[0]]))
