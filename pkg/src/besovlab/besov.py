"""Besov quasi-norms, the series constant and the mixed-norm diagnostics."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .grid import GridField, lp_norm
from .littlewood_paley import RadialPartition, TensorPartition, iter_blocks, iter_theta_blocks


def parse_exponent(x) -> float:
    """Accept ``0.5``, ``"1/3"``, ``"inf"`` and friends; return a float.

    Strings go through :class:`fractions.Fraction` so ``"1/3"`` becomes the
    correctly rounded double of one third rather than a truncated decimal.
    """
    if isinstance(x, str):
        t = x.strip().lower()
        if t in ("inf", "infinity", "oo", "∞"):
            return float("inf")
        try:
            return float(Fraction(t))
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"cannot parse exponent {x!r}") from None
    return float(x)


@dataclass(frozen=True)
class BesovParams:
    """Smoothness ``s``, integral exponent ``p`` and sum exponent ``q``."""

    s: float
    p: float
    q: float

    def __post_init__(self):
        s, p, q = (parse_exponent(v) for v in (self.s, self.p, self.q))
        if not np.isfinite(s):
            raise ValidationError("smoothness must be finite")
        if not (p > 0 and q > 0):
            raise ValidationError(f"p and q must be positive, got p={p}, q={q}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def lam(self):
        return min(1.0, self.p, self.q)

    def as_dict(self):
        return {"s": self.s, "p": self.p, "q": self.q}


def lq_combine(values, q) -> float:
    v = np.abs(np.asarray(values, dtype=float))
    if v.size == 0:
        return 0.0
    if np.isinf(q):
        return float(v.max())
    return float(np.sum(v ** q) ** (1.0 / q))


def shell_norms(u: GridField, p, P: RadialPartition) -> np.ndarray:
    """``L_p`` norms of the radial blocks, shell by shell."""
    return np.array([lp_norm(b, p) for _, b in iter_blocks(u, P)])


def besov_norm(u: GridField, bp: BesovParams, P: RadialPartition) -> float:
    a = shell_norms(u, bp.p, P)
    w = 2.0 ** (bp.s * np.arange(a.size))
    return lq_combine(w * a, bp.q)


def theta_norms(u: GridField, p, T: TensorPartition) -> dict:
    return {key: lp_norm(b, p) for key, b in iter_theta_blocks(u, T)}


def besov_norm_theta(u: GridField, bp: BesovParams, T: TensorPartition) -> float:
    """Tensor-form quasi-norm: one term per ``(J, k)`` block, weight ``2**(s k)``."""
    norms = theta_norms(u, bp.p, T)
    return lq_combine([2.0 ** (bp.s * k) * v for (_, k), v in norms.items()], bp.q)


def series_B_from_norms(norms, bp: BesovParams) -> float:
    """``(sum_j (2**(s j) a_j)**q)**(1/q)`` for precomputed block norms ``a_j``."""
    a = np.asarray(norms, dtype=float)
    return lq_combine(2.0 ** (bp.s * np.arange(a.size)) * a, bp.q)


def series_B(blocks, bp: BesovParams) -> float:
    """Series constant of terms ``u_0, u_1, ...`` (``None`` counts as zero)."""
    return series_B_from_norms([0.0 if b is None else lp_norm(b, bp.p) for b in blocks], bp)


def mixed_norm(u: GridField, p, axis=-1) -> float:
    """``L_p`` over the remaining axes of the supremum along ``axis``."""
    if u.spec.ndim < 2:
        raise ValidationError("mixed norm needs at least two dimensions")
    sup = np.abs(u.samples).max(axis=axis)
    return lp_norm(GridField(u.spec.drop_axis(axis), sup), p)


def fiber_norms(u: GridField, p, axis=-1):
    """Per-fiber ``(sup, L_p)`` pairs along ``axis`` (fibers flattened)."""
    a = np.moveaxis(np.abs(u.samples), axis, -1)
    a = a.reshape(-1, a.shape[-1])
    h = u.spec.steps[axis]
    p = float(p)
    sup = a.max(axis=1)
    if np.isinf(p):
        lp = sup.copy()
    else:
        lp = (np.sum(a ** p, axis=1) * h) ** (1.0 / p)
    return sup, lp


def nikolskii_ratio(block: GridField, j: int, p, axis=-1, rel_floor=1e-12) -> float:
    """Worst fiber ratio ``sup |b| / (2**(j/p) ||b||_p)`` along ``axis``.

    Fibers whose ``L_p`` norm is below ``rel_floor`` times the largest one
    are skipped: the inequality is vacuous there and rounding dust would
    otherwise dominate.
    """
    sup, lp = fiber_norms(block, p, axis)
    top = lp.max()
    if top == 0:
        raise ValidationError("Nikolskii ratio undefined on a zero block")
    keep = lp > rel_floor * top
    scale = 2.0 ** (j / float(p))
    return float(np.max(sup[keep] / lp[keep]) / scale)
