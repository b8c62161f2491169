"""Recommendation policies.

Each policy maps a user and the creator population to a probability
vector over creators.  The single-user ``*_row`` functions are the
readable definitions; :func:`policy_rows` computes every user's row at
once and is what the engine uses.  In the batched form a row of all
zeros means the user gets no recommendation this step (truncation with
nothing above the threshold).
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import NO_REC
from .errors import KTooLarge

POLICY_KINDS = ("softmax", "topk", "truncation", "diversity", "uniform_mix")
DEFAULT_LIST_LEN = 10


@dataclass(frozen=True)
class PolicySpec:
    kind: str = "softmax"
    beta: float = 1.0
    k: int | None = None
    tau: float | None = None
    rho: float | None = None
    list_len: int | None = None
    eps: float | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise ValueError("beta must be finite and >= 0")
        required = {
            "softmax": (),
            "topk": ("k",),
            "truncation": ("tau",),
            "diversity": ("rho",),
            "uniform_mix": ("eps",),
        }[self.kind]
        for name in ("k", "tau", "rho", "eps"):
            value = getattr(self, name)
            if name in required and value is None:
                raise ValueError(f"{self.kind} policy needs {name}")
            if name not in required and value is not None:
                raise ValueError(f"{self.kind} policy does not take {name}")
        if self.kind == "topk" and (int(self.k) != self.k or self.k < 1):
            raise ValueError("k must be an integer >= 1")
        if self.kind == "truncation" and not -1.0 <= self.tau <= 1.0:
            raise ValueError("tau must lie in [-1, 1]")
        if self.kind == "diversity":
            if not (np.isfinite(self.rho) and self.rho >= 0):
                raise ValueError("rho must be finite and >= 0")
            if self.list_len is None:
                object.__setattr__(self, "list_len", DEFAULT_LIST_LEN)
            if self.list_len < 1:
                raise ValueError("list_len must be >= 1")
        elif self.list_len is not None:
            raise ValueError("list_len only applies to the diversity policy")
        if self.kind == "uniform_mix" and not 0.0 <= self.eps <= 1.0:
            raise ValueError("eps must lie in [0, 1]")

    def label(self):
        extra = {"topk": "k", "truncation": "tau", "diversity": "rho", "uniform_mix": "eps"}
        name = extra.get(self.kind)
        tail = f", {name}={getattr(self, name)}" if name else ""
        return f"{self.kind}(beta={self.beta}{tail})"


# single-user rows


def _softmax(logits):
    z = logits - np.max(logits)
    w = np.exp(z)
    return w / w.sum()


def softmax_row(u, creators, beta):
    s = np.asarray(creators, dtype=float) @ np.asarray(u, dtype=float)
    return _softmax(beta * s)


def topk_row(u, creators, k, beta):
    """Softmax renormalized over the ``k`` most relevant creators (ties: lower index)."""
    s = np.asarray(creators, dtype=float) @ np.asarray(u, dtype=float)
    n = s.shape[0]
    if k > n:
        raise KTooLarge(f"k={k} exceeds n={n}")
    keep = np.argsort(-s, kind="stable")[:k]
    out = np.zeros(n)
    out[keep] = _softmax(beta * s[keep])
    return out


def truncation_row(u, creators, tau, beta):
    """Softmax over creators with inner product >= ``tau``; ``None`` if there are none."""
    s = np.asarray(creators, dtype=float) @ np.asarray(u, dtype=float)
    keep = np.flatnonzero(s >= tau)
    if keep.size == 0:
        return None
    out = np.zeros(s.shape[0])
    out[keep] = _softmax(beta * s[keep])
    return out


def diversity_row(u, creators, recent, rho, beta):
    """Softmax of relevance plus ``rho`` times dissimilarity to recently shown creators."""
    V = np.asarray(creators, dtype=float)
    score = V @ np.asarray(u, dtype=float)
    for i in recent:
        score = score + rho * (1.0 - V @ V[i])
    return _softmax(beta * score)


def uniform_mix_row(base, eps):
    base = np.asarray(base, dtype=float)
    return (1.0 - eps) * base + eps / base.shape[0]


class RecentLists:
    """Per-user ring buffers of the last ``length`` recommended creators."""

    def __init__(self, m, length=DEFAULT_LIST_LEN):
        self.length = int(length)
        self._buf = np.full((m, self.length), NO_REC, dtype=np.int64)
        self._next = 0
        self._filled = 0

    @property
    def m(self):
        return self._buf.shape[0]

    def push(self, assignment):
        """Record one step; users with no recommendation record nothing."""
        a = np.asarray(assignment, dtype=np.int64)
        self._buf[:, self._next] = a
        self._next = (self._next + 1) % self.length
        self._filled = min(self._filled + 1, self.length)

    def user(self, j):
        """Recent creators of user ``j``, oldest first."""
        order = [(self._next - self._filled + t) % self.length for t in range(self._filled)]
        return [int(i) for i in self._buf[j, order] if i != NO_REC]

    def counts(self, n):
        """``(m, n)`` matrix of how often each creator appears in each user's list."""
        out = np.zeros((self.m, n))
        rows, cols = np.nonzero(self._buf != NO_REC)
        np.add.at(out, (rows, self._buf[rows, cols]), 1.0)
        return out

    def copy(self):
        other = RecentLists.__new__(RecentLists)
        other.length = self.length
        other._buf = self._buf.copy()
        other._next = self._next
        other._filled = self._filled
        return other


# whole-population rows


def _masked_softmax(logits, mask=None):
    if mask is not None:
        logits = np.where(mask, logits, -np.inf)
    top = np.max(logits, axis=1, keepdims=True)
    empty = ~np.isfinite(top[:, 0])
    top[empty] = 0.0
    w = np.exp(logits - top)
    total = w.sum(axis=1, keepdims=True)
    total[empty] = 1.0
    return w / total


def policy_rows(state, spec, recents=None):
    """Recommendation distribution of every user, shape ``(m, n)``."""
    U, V = state.users, state.creators
    S = U @ V.T
    n = V.shape[0]
    if spec.kind == "softmax":
        return _masked_softmax(spec.beta * S)
    if spec.kind == "uniform_mix":
        return (1.0 - spec.eps) * _masked_softmax(spec.beta * S) + spec.eps / n
    if spec.kind == "topk":
        if spec.k > n:
            raise KTooLarge(f"k={spec.k} exceeds n={n}")
        keep = np.argsort(-S, axis=1, kind="stable")[:, : spec.k]
        mask = np.zeros(S.shape, dtype=bool)
        np.put_along_axis(mask, keep, True, axis=1)
        return _masked_softmax(spec.beta * S, mask)
    if spec.kind == "truncation":
        return _masked_softmax(spec.beta * S, S >= spec.tau)
    if spec.kind == "diversity":
        score = S
        if recents is not None and spec.rho > 0:
            C = recents.counts(n)
            score = S + spec.rho * (C.sum(axis=1, keepdims=True) - C @ (V @ V.T))
        return _masked_softmax(spec.beta * score)
    raise AssertionError(spec.kind)


def sample_rows(rows, uniforms):
    """Inverse-CDF draw of one creator per row; all-zero rows give ``NO_REC``.

    User ``j`` consumes exactly ``uniforms[j]``, so the draw of one user
    does not depend on how many other users there are or their order.
    """
    rows = np.asarray(rows, dtype=float)
    m, n = rows.shape
    cdf = np.cumsum(rows, axis=1)
    idx = np.count_nonzero(cdf <= np.asarray(uniforms)[:, None], axis=1)
    overflow = idx >= n
    if np.any(overflow):
        # rounding left the cdf just below u: take the last supported creator
        last = n - 1 - np.argmax(rows[:, ::-1] > 0, axis=1)
        idx = np.where(overflow, last, idx)
    none = cdf[:, -1] <= 0.0
    return np.where(none, NO_REC, idx).astype(np.int64)


def sample_assignment(state, spec, recents, rng):
    """Draw one creator per user and append the draws to ``recents``.

    ``rng`` is a ``numpy.random.Generator``; exactly ``m`` uniforms are
    consumed, user ``j`` taking the ``j``-th.
    """
    rows = policy_rows(state, spec, recents)
    assignment = sample_rows(rows, rng.random(state.m))
    if recents is not None:
        recents.push(assignment)
    return assignment
