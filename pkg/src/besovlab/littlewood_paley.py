"""
Dyadic frequency partitions on periodic grids.

Two families of multipliers are built here. The radial one uses
``Psi_j(xi) = Psi(|xi| / 2**j)`` with a cutoff ``Psi`` equal to 1 below 11/10
and 0 above 13/10, and blocks ``Phi_0 = Psi_0``, ``Phi_j = Psi_j - Psi_{j-1}``.
The top block absorbs everything the grid can represent above the last
full shell, so the masks sum to one at every frequency and synthesis is
lossless.

The tensor family replaces ``|xi|`` with per-axis one-dimensional cutoffs.
Shell ``k`` splits into ``2**n - 1`` product masks indexed by the nonempty set
of axes carrying the annular factor.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _fft
from .errors import ValidationError
from .grid import GridField, GridSpec, SpectralField

INNER = 1.1
OUTER = 1.3
CACHE_POINTS = 1 << 22


def _exp_weight(s):
    out = np.zeros_like(s)
    pos = s > 0
    with np.errstate(over="ignore", divide="ignore"):   # subnormal s -> exp(-inf) = 0
        out[pos] = np.exp(-1.0 / s[pos])
    return out


def _exp2_weight(s):
    out = np.zeros_like(s)
    pos = s > 0
    with np.errstate(over="ignore", divide="ignore"):
        out[pos] = np.exp(-1.0 / (s[pos] * s[pos]))
    return out


_WEIGHTS = {"exp": _exp_weight, "exp2": _exp2_weight}


def smooth_step(s, kind="exp"):
    """C-infinity step: 1 for ``s <= 0``, 0 for ``s >= 1``.

    Built as the quotient ``w(1-s) / (w(s) + w(1-s))`` of a flat weight
    ``w``; ``kind="exp"`` uses ``exp(-1/s)`` and ``kind="exp2"`` uses
    ``exp(-1/s**2)``. Both satisfy ``g(s) + g(1-s) = 1``.
    """
    try:
        w = _WEIGHTS[kind]
    except KeyError:
        raise ValidationError(f"unknown transition kind {kind!r}") from None
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    a = w(1.0 - s)
    b = w(s)
    den = a + b
    out = np.where(s <= 0, 1.0, 0.0)
    mid = (s > 0) & (s < 1)
    out[mid] = a[mid] / den[mid]
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class CutoffProfile:
    """Radial cutoff equal to 1 below ``inner`` and 0 above ``outer``."""

    inner: float = INNER
    outer: float = OUTER
    kind: str = "exp"

    def __post_init__(self):
        if not 0 < self.inner < self.outer < 2 * self.inner:
            raise ValidationError("need 0 < inner < outer < 2*inner")
        if self.kind not in _WEIGHTS:
            raise ValidationError(f"unknown transition kind {self.kind!r}")

    def __call__(self, t):
        return smooth_step((np.asarray(t, dtype=float) - self.inner)
                           / (self.outer - self.inner), self.kind)


CANONICAL = CutoffProfile()


def representable_radius(spec: GridSpec) -> float:
    """Largest radius below which shells are considered fully resolved."""
    return max((n // 2 - 1) * 2 * np.pi / L for n, L in zip(spec.sizes, spec.periods))


def top_shell(spec: GridSpec, profile: CutoffProfile = CANONICAL) -> int:
    """Largest ``j`` with ``outer * 2**j`` strictly below the representable radius."""
    R = representable_radius(spec)
    j = -1
    while profile.outer * 2.0 ** (j + 1) < R:
        j += 1
    return j


@dataclass(frozen=True, eq=False)
class RadialPartition:
    """Radial multipliers ``Phi_0 .. Phi_Jmax`` on one grid.

    Masks are evaluated on demand from the cached frequency radius, which
    keeps memory flat on large grids.
    """

    spec: GridSpec
    J_max: int
    profile: CutoffProfile = CANONICAL

    @cached_property
    def _radius(self):
        return self.spec.frequency_radius()

    @cached_property
    def _radius_half(self):
        return self.spec.frequency_radius(half=True)

    @cached_property
    def _cache(self):
        return {}

    def psi(self, j, half=False):
        """Low-pass mask ``Psi_j`` (real-FFT layout with ``half=True``).

        Cached on grids up to ``CACHE_POINTS`` samples.
        """
        key = (j, half)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        r = self._radius_half if half else self._radius
        m = self.profile(r / 2.0 ** j)
        if self.spec.npoints <= CACHE_POINTS:
            m.setflags(write=False)
            self._cache[key] = m
        return m

    def mask(self, j, half=False):
        if not 0 <= j <= self.J_max:
            raise ValidationError(f"shell {j} outside 0..{self.J_max}")
        if j == 0:
            return self.psi(0, half)
        if j == self.J_max:
            return 1.0 - self.psi(j - 1, half)
        return self.psi(j, half) - self.psi(j - 1, half)

    def mask_field(self, j):
        return SpectralField(self.spec, self.mask(j))

    @property
    def masks(self):
        return [self.mask(j) for j in range(self.J_max + 1)]

    def shell_bounds(self, j):
        """Radii outside which mask ``j`` vanishes identically."""
        lo = 0.0 if j == 0 else self.profile.inner * 2.0 ** (j - 1)
        hi = np.inf if j == self.J_max else self.profile.outer * 2.0 ** j
        return lo, hi

    def hyperplane(self, axis=-1):
        """Partition ``Phi'_j(xi') = Phi_j(xi', 0)`` on the hyperplane grid."""
        return RadialPartition(self.spec.drop_axis(axis), self.J_max, self.profile)


def build_radial_partition(spec: GridSpec, profile: CutoffProfile = CANONICAL,
                           J_max=None) -> RadialPartition:
    if J_max is None:
        J_max = top_shell(spec, profile)
        if J_max < 3:
            raise ValidationError(
                f"grid too small: top shell {J_max} < 3 for sizes {spec.sizes}")
    return RadialPartition(spec, int(J_max), profile)


@dataclass(frozen=True, eq=False)
class LPDecomposition:
    blocks: tuple
    partition: RadialPartition

    @property
    def J_max(self):
        return self.partition.J_max

    @property
    def shell_radii(self):
        return [self.partition.shell_bounds(j) for j in range(self.J_max + 1)]

    def synthesize(self) -> GridField:
        total = np.zeros_like(self.blocks[0].samples)
        for b in self.blocks:
            total = total + b.samples
        return GridField(self.partition.spec, total)

    def leakage(self):
        """Per block, largest coefficient where the mask vanishes, relative
        to the block's largest coefficient (0 for an empty block)."""
        out = []
        for j, b in enumerate(self.blocks):
            c = np.abs(_fft.fftn(b.samples))
            top = c.max()
            off = self.partition.mask(j) == 0
            out.append(0.0 if top == 0 or not off.any() else float(c[off].max() / top))
        return out


def _check_spec(u, spec):
    if u.spec != spec:
        raise ValidationError("field grid does not match the partition grid")


def iter_blocks(u: GridField, P: RadialPartition):
    """Yield ``(j, block_j)`` without holding every block in memory.

    Real fields stay real: the radial masks are even, so the real-FFT path
    gives the same blocks at half the cost.
    """
    _check_spec(u, P.spec)
    real = np.isrealobj(u.samples)
    U = _fft.rfftn(u.samples) if real else _fft.fftn(u.samples)
    for j in range(P.J_max + 1):
        V = U * P.mask(j, half=real)
        if not V.any():
            yield j, GridField(P.spec, np.zeros(P.spec.sizes, dtype=u.samples.dtype))
        elif real:
            yield j, GridField(P.spec, _fft.irfftn(V, P.spec.sizes))
        else:
            yield j, GridField(P.spec, _fft.ifftn(V))


def analyze(u: GridField, P: RadialPartition) -> LPDecomposition:
    return LPDecomposition(tuple(b for _, b in iter_blocks(u, P)), P)


def synthesize(dec: LPDecomposition) -> GridField:
    return dec.synthesize()


@dataclass(frozen=True, eq=False)
class TensorPartition:
    """Product masks ``Theta_{J,k}`` built from one-dimensional cutoffs.

    ``Theta_{(),0} = prod_i Psi1_0(xi_i)`` and, for ``k >= 1`` and nonempty
    ``J``, ``Theta_{J,k} = prod_{i in J} Phi1_k(xi_i) prod_{i not in J}
    Psi1_{k-1}(xi_i)``. The top shell ``K`` is the first one whose low-pass
    factor is identically 1 on the grid, so no closure block is needed.
    """

    spec: GridSpec
    K: int
    profile: CutoffProfile = CANONICAL
    _freqs: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_freqs",
                           tuple(np.abs(self.spec.frequencies(i)) for i in range(self.spec.ndim)))

    def psi1(self, axis, k):
        return self.profile(self._freqs[axis] / 2.0 ** k)

    def phi1(self, axis, k):
        if k == 0:
            return self.psi1(axis, 0)
        return self.psi1(axis, k) - self.psi1(axis, k - 1)

    def keys(self):
        n = self.spec.ndim
        out = [((), 0)]
        subsets = [c for r in range(1, n + 1) for c in itertools.combinations(range(n), r)]
        for k in range(1, self.K + 1):
            out.extend((J, k) for J in subsets)
        return out

    def factors(self, J, k):
        """One-dimensional factors, one array per axis."""
        if k == 0:
            return [self.psi1(i, 0) for i in range(self.spec.ndim)]
        if not J:
            raise ValidationError("shell k >= 1 needs a nonempty axis set")
        return [self.phi1(i, k) if i in J else self.psi1(i, k - 1)
                for i in range(self.spec.ndim)]

    def mask(self, J, k):
        m = 1.0
        for i, f in enumerate(self.factors(J, k)):
            shape = [1] * self.spec.ndim
            shape[i] = -1
            m = m * f.reshape(shape)
        return np.broadcast_to(m, self.spec.sizes)

    def evaluate(self, J, k, xi):
        """Continuum value of ``Theta_{J,k}`` at points ``xi`` (shape ``(..., n)``)."""
        xi = np.abs(np.asarray(xi, dtype=float))
        prof = self.profile
        if k == 0:
            return np.prod(prof(xi), axis=-1)
        out = 1.0
        for i in range(self.spec.ndim):
            t = xi[..., i] / 2.0 ** k
            if i in J:
                out = out * (prof(t) - prof(2 * t))
            else:
                out = out * prof(2 * t)
        return out


def tensor_top_shell(spec: GridSpec, profile: CutoffProfile = CANONICAL) -> int:
    top = max(n / 2 * 2 * np.pi / L for n, L in zip(spec.sizes, spec.periods))
    K = 1
    while profile.inner * 2.0 ** K < top:
        K += 1
    return K


def build_tensor_partition(spec: GridSpec, profile: CutoffProfile = CANONICAL) -> TensorPartition:
    return TensorPartition(spec, tensor_top_shell(spec, profile), profile)


def iter_theta_blocks(u: GridField, T: TensorPartition):
    _check_spec(u, T.spec)
    if np.isrealobj(u.samples):
        U = _fft.rfftn(u.samples)
        h = T.spec.sizes[-1] // 2 + 1
        for key in T.keys():
            m = T.mask(*key)[..., :h]
            yield key, GridField(T.spec, _fft.irfftn(U * m, T.spec.sizes))
        return
    U = _fft.fftn(u.samples)
    for key in T.keys():
        yield key, GridField(T.spec, _fft.ifftn(U * T.mask(*key)))


def theta_analyze(u: GridField, T: TensorPartition) -> dict:
    return dict(iter_theta_blocks(u, T))
