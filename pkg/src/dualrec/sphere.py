"""Geometry on the unit sphere.

Vectors are plain float64 numpy arrays.  Single vectors have shape ``(d,)``;
populations are stacked row-wise with shape ``(count, d)``.
"""

import numpy as np

from .errors import DimensionMismatch, ZeroVector

ZERO_NORM = 1e-12
UNIT_TOL = 1e-9


def project(x):
    """Scale ``x`` onto the unit sphere."""
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x)
    if norm <= ZERO_NORM:
        raise ZeroVector()
    return x / norm


def project_rows(X):
    """Row-wise :func:`project`; raises :class:`ZeroVector` naming the first bad row."""
    X = np.asarray(X, dtype=float)
    norms = np.linalg.norm(X, axis=-1)
    bad = np.flatnonzero(norms <= ZERO_NORM)
    if bad.size:
        raise ZeroVector(index=int(bad[0]))
    return X / norms[..., None]


def inner(x, y, clamp=False):
    """Dot product of two equal-length vectors.

    The raw value is what the dynamics use.  ``clamp=True`` clips to
    ``[-1, 1]`` for arccos-style consumers that cannot tolerate rounding
    slightly outside the range.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes {x.shape} and {y.shape} differ")
    value = float(x @ y)
    if clamp:
        value = min(1.0, max(-1.0, value))
    return value


def is_unit(x, tol=UNIT_TOL):
    norms = np.linalg.norm(np.atleast_2d(x), axis=-1)
    return bool(np.all(np.abs(norms - 1.0) <= tol))


def check_unit(x, name="vector"):
    """Validate a unit vector (or stack of them) and return it as a float array."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise DimensionMismatch(f"{name}: dimension must be at least 2, got {x.shape[-1]}")
    if not is_unit(x):
        raise ValueError(f"{name} is not unit norm within {UNIT_TOL}")
    return x


def sq_distance_identity_check(x, y):
    """Both sides of ``|x - y|^2 = 2 (1 - <x, y>)`` for unit ``x``, ``y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = x - y
    lhs = float(diff @ diff)
    rhs = 2.0 * (1.0 - inner(x, y))
    return lhs, rhs


def random_unit(rng, size, d):
    """``size`` i.i.d. uniform points on the sphere in R^d (normalized Gaussians)."""
    return project_rows(rng.standard_normal((size, d)))


def random_within(rng, center, radius, size):
    """Unit vectors at chord distance at most ``radius`` from the unit ``center``.

    The chord distance is drawn uniformly from ``[0, radius]`` and the
    direction uniformly from the tangent space at ``center``.
    """
    center = np.asarray(center, dtype=float)
    d = center.shape[0]
    chord = rng.uniform(0.0, radius, size=size)
    angle = 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
    tangent = rng.standard_normal((size, d))
    tangent -= np.outer(tangent @ center, center)
    tangent = project_rows(tangent)
    out = np.cos(angle)[:, None] * center + np.sin(angle)[:, None] * tangent
    return project_rows(out)
