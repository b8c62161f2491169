"""Diversity and polarization diagnostics of a population state.

``rows`` arguments are the per-user recommendation distributions of the
policy that is actually in force (see :func:`dualrec.policy.policy_rows`);
an all-zero row (user not served) contributes nothing to the sums but
still counts in the ``1/m`` normalization.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NeedTwoCreators


@dataclass(frozen=True)
class MeasureRecord:
    time: int
    cd: float
    rd: float
    rr: float
    tp: float


def creator_diversity(creators):
    """Mean Euclidean distance over ordered pairs of distinct creators."""
    V = np.asarray(creators, dtype=float)
    n = V.shape[0]
    if n < 2:
        raise NeedTwoCreators("creator diversity needs n >= 2")
    dist = np.linalg.norm(V[:, None, :] - V[None, :, :], axis=-1)
    return float(dist.sum() / (n * (n - 1)))


def recommendation_diversity(state, rows):
    """Mean over users of the probability-weighted variance of recommended creators."""
    V = state.creators
    P = np.asarray(rows, dtype=float)
    mean = P @ V
    spread = np.sum((V[None, :, :] - mean[:, None, :]) ** 2, axis=-1)
    return float(np.sum(P * spread) / P.shape[0])


def recommendation_relevance(state, rows):
    """Mean over users of the probability-weighted user-creator inner product."""
    P = np.asarray(rows, dtype=float)
    S = state.users @ state.creators.T
    return float(np.sum(P * S) / P.shape[0])


def tendency_to_polarization(creators):
    """Mean absolute inner product over all ordered creator pairs, diagonal included."""
    V = np.asarray(creators, dtype=float)
    n = V.shape[0]
    return float(np.abs(V @ V.T).sum() / n**2)


def measure(state, rows):
    """All four diagnostics at ``state.time``.

    CD is reported as 0.0 when there is a single creator.
    """
    cd = creator_diversity(state.creators) if state.n >= 2 else 0.0
    return MeasureRecord(
        time=state.time,
        cd=cd,
        rd=recommendation_diversity(state, rows),
        rr=recommendation_relevance(state, rows),
        tp=tendency_to_polarization(state.creators),
    )
