"""Impact functions: how a creator moves a user (f) and a user moves a creator (g).

Both are functions of the inner product only, so the array versions take
inner products directly.  Signs of exactly ``0.0`` are treated as zero,
with no epsilon band.
"""

from dataclasses import dataclass

import numpy as np

from .sphere import inner

USER_KINDS = ("inner_product", "sign_affine", "sign_only")
CREATOR_KINDS = ("sign",)


@dataclass(frozen=True)
class UserImpact:
    """``f(v, u)`` as a function of ``s = <v, u>``.

    * ``inner_product``: ``s``.  Bounded by 1 but has no positive lower
      bound away from orthogonality.
    * ``sign_affine``: ``a sign(s) + b s`` with ``a > 0``, ``b >= 0`` and
      ``a + b <= 1``; the lower bound on ``|f|`` is ``a``.
    * ``sign_only``: ``a sign(s)``, i.e. ``sign_affine`` with ``b = 0``.
    """

    kind: str = "inner_product"
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if self.kind not in USER_KINDS:
            raise ValueError(f"unknown user impact kind {self.kind!r}")
        if self.kind == "sign_only" and self.b != 0.0:
            raise ValueError("sign_only takes no b parameter")
        if self.kind in ("sign_affine", "sign_only"):
            if not (np.isfinite(self.a) and np.isfinite(self.b)):
                raise ValueError("impact parameters must be finite")
            if self.a <= 0 or self.b < 0 or self.a + self.b > 1.0:
                raise ValueError("need a > 0, b >= 0 and a + b <= 1")

    @property
    def lower_bound(self):
        """``L_f``, or 0.0 when the family has none."""
        return 0.0 if self.kind == "inner_product" else float(self.a)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "inner_product":
            return s.copy() if s.ndim else float(s)
        out = self.a * np.sign(s) + self.b * s
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class CreatorImpact:
    """``g(u, v) = sign(<u, v>)``."""

    kind: str = "sign"

    def __post_init__(self):
        if self.kind not in CREATOR_KINDS:
            raise ValueError(f"unknown creator impact kind {self.kind!r}")

    def __call__(self, s):
        out = np.sign(np.asarray(s, dtype=float))
        return out if out.ndim else float(out)


def eval_f(spec, v, u):
    return spec(inner(v, u))


def eval_g(spec, u, v):
    return spec(inner(u, v))
