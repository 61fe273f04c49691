"""Least-squares power laws in log-log coordinates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class PowerLawFit:
    """``value ~ prefactor * parameter**exponent``."""

    x: tuple
    y: tuple
    exponent: float
    prefactor: float
    r2: float

    def predict(self, x):
        return self.prefactor * np.asarray(x, dtype=float) ** self.exponent

    def as_dict(self):
        return {"exponent": self.exponent, "prefactor": self.prefactor, "r2": self.r2,
                "samples": [[a, b] for a, b in zip(self.x, self.y)]}


def fit_power_law(samples) -> PowerLawFit:
    """Fit ``log y = alpha log x + log C`` by least squares.

    Parameters
    ----------
    samples : iterable of (x, y)
        At least three pairs with ``x > 0`` and ``y > 0``.
    """
    pts = [(float(a), float(b)) for a, b in samples]
    if len(pts) < 3:
        raise ValidationError("power-law fit needs at least three samples")
    x = np.array([a for a, _ in pts])
    y = np.array([b for _, b in pts])
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValidationError("power-law fit needs positive finite samples")
    lx, ly = np.log(x), np.log(y)
    mx, my = lx.mean(), ly.mean()
    dx = lx - mx
    sxx = float(dx @ dx)
    if sxx == 0:
        raise ValidationError("power-law fit needs distinct parameters")
    alpha = float(dx @ (ly - my)) / sxx
    logc = my - alpha * mx
    resid = ly - (alpha * lx + logc)
    sst = float((ly - my) @ (ly - my))
    r2 = 1.0 if sst == 0 else 1.0 - float(resid @ resid) / sst
    return PowerLawFit(tuple(x.tolist()), tuple(y.tolist()), alpha, float(np.exp(logc)), r2)


def log2_slope(js, values) -> float:
    """Slope of ``log2(values)`` against an index (not a logarithm)."""
    js = np.asarray(js, dtype=float)
    ly = np.log2(np.asarray(values, dtype=float))
    return float(np.polyfit(js, ly, 1)[0])
