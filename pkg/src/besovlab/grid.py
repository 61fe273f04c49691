"""
Periodic grids and the fields that live on them.

A :class:`GridSpec` describes a flat torus with ``ndim`` axes, each sampled at
``N_i`` equispaced points over one period ``L_i``. Sample ``m`` on axis ``i``
sits at ``m * L_i / N_i`` so the origin is always a grid point.

Transforms use the unitary-in-mean convention::

    coeffs = fftn(samples) / prod(N)

so a constant field has coefficient 1 at frequency zero and the frequency
index ``m`` corresponds to the analytic frequency ``2*pi*m / L_i``. With this
convention the coefficients of ``a(x') b(x_n)`` are the outer product of the
1-d coefficients, and the periodization of ``f`` has coefficients
``fhat(xi) / prod(L)`` where ``fhat`` is the continuum Fourier transform.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _fft
from .errors import ValidationError

_MAGIC = b"GFLD1"


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Sizes and periods of a periodic grid.

    Parameters
    ----------
    sizes : tuple of int
        Points per axis, powers of two and at least 8.
    periods : tuple of float
        Physical period of each axis. Defaults to ``2*pi`` on every axis.
    """

    sizes: tuple
    periods: tuple = None

    def __post_init__(self):
        sizes = tuple(int(n) for n in np.atleast_1d(self.sizes))
        if not 1 <= len(sizes) <= 3:
            raise ValidationError(f"ndim must be 1, 2 or 3, got {len(sizes)}")
        for n in sizes:
            if n < 8 or not _is_pow2(n):
                raise ValidationError(f"grid sizes must be powers of two >= 8, got {n}")
        periods = self.periods
        if periods is None:
            periods = (2 * np.pi,) * len(sizes)
        periods = tuple(float(L) for L in np.atleast_1d(periods))
        if len(periods) == 1 and len(sizes) > 1:
            periods = periods * len(sizes)
        if len(periods) != len(sizes):
            raise ValidationError("sizes and periods differ in length")
        if not all(np.isfinite(L) and L > 0 for L in periods):
            raise ValidationError("periods must be positive and finite")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "periods", periods)

    @classmethod
    def cube(cls, n, ndim, period=2 * np.pi):
        return cls((n,) * ndim, (period,) * ndim)

    @property
    def ndim(self):
        return len(self.sizes)

    @property
    def shape(self):
        return self.sizes

    @property
    def steps(self):
        return tuple(L / n for L, n in zip(self.periods, self.sizes))

    @property
    def cell_volume(self):
        return float(np.prod(self.steps))

    @property
    def volume(self):
        return float(np.prod(self.periods))

    @property
    def npoints(self):
        return int(np.prod(self.sizes))

    def coords(self, axis, centered=False):
        """Sample coordinates along one axis.

        With ``centered=True`` the coordinates are wrapped into
        ``[-L/2, L/2)``, which is the natural chart for compact bumps
        placed at the origin.
        """
        n, L = self.sizes[axis], self.periods[axis]
        m = np.arange(n)
        if centered:
            m = np.where(m < n // 2, m, m - n)
        return m * (L / n)

    def frequencies(self, axis):
        """Analytic frequencies ``2*pi*m/L`` in FFT order."""
        n, L = self.sizes[axis], self.periods[axis]
        return 2 * np.pi * np.fft.fftfreq(n, d=L / n)

    def nyquist(self, axis):
        return np.pi * self.sizes[axis] / self.periods[axis]

    def mesh(self, centered=False):
        return np.meshgrid(*[self.coords(i, centered) for i in range(self.ndim)],
                           indexing="ij", sparse=True)

    def half_frequencies(self):
        """Analytic frequencies of the last axis in real-FFT layout."""
        n, L = self.sizes[-1], self.periods[-1]
        return 2 * np.pi * np.fft.rfftfreq(n, d=L / n)

    @property
    def half_shape(self):
        return self.sizes[:-1] + (self.sizes[-1] // 2 + 1,)

    def frequency_mesh(self, half=False):
        axes = [self.frequencies(i) for i in range(self.ndim)]
        if half:
            axes[-1] = self.half_frequencies()
        return np.meshgrid(*axes, indexing="ij", sparse=True)

    def frequency_radius(self, half=False):
        """Euclidean length of the analytic frequency at each grid index
        (real-FFT layout with ``half=True``)."""
        r2 = 0.0
        for w in self.frequency_mesh(half):
            r2 = r2 + w * w
        return np.sqrt(np.broadcast_to(r2, self.half_shape if half else self.sizes))

    def drop_axis(self, axis):
        if self.ndim < 2:
            raise ValidationError("cannot drop an axis from a 1-d grid")
        axis = _norm_axis(axis, self.ndim)
        keep = [i for i in range(self.ndim) if i != axis]
        return GridSpec(tuple(self.sizes[i] for i in keep),
                        tuple(self.periods[i] for i in keep))

    def insert_axis(self, axis, size, period):
        if self.ndim >= 3:
            raise ValidationError("cannot exceed three dimensions")
        axis = _norm_axis(axis, self.ndim + 1)
        sizes = list(self.sizes)
        periods = list(self.periods)
        sizes.insert(axis, size)
        periods.insert(axis, period)
        return GridSpec(tuple(sizes), tuple(periods))


def _norm_axis(axis, ndim):
    if not -ndim <= axis < ndim:
        raise ValidationError(f"axis {axis} out of range for {ndim}-d grid")
    return axis % ndim


def _check_finite(a):
    if not np.all(np.isfinite(a)):
        raise ValidationError("field contains NaN or Inf")


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples of a (possibly complex) function on a periodic grid."""

    spec: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.samples)
        if a.dtype.kind not in "fc":
            a = a.astype(float)
        if a.shape != self.spec.sizes:
            if a.size != self.spec.npoints:
                raise ValidationError(
                    f"sample count {a.size} does not match grid {self.spec.sizes}")
            a = a.reshape(self.spec.sizes)
        _check_finite(a)
        a.setflags(write=False)
        object.__setattr__(self, "samples", a)

    @classmethod
    def zeros(cls, spec, dtype=float):
        return cls(spec, np.zeros(spec.sizes, dtype=dtype))

    @classmethod
    def from_function(cls, spec, func, centered=False):
        """Evaluate ``func(*coords)`` on the grid (coordinates broadcast)."""
        vals = func(*spec.mesh(centered))
        return cls(spec, np.broadcast_to(vals, spec.sizes).copy())

    def _same(self, other):
        if self.spec != other.spec:
            raise ValidationError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, GridField):
            self._same(other)
            return GridField(self.spec, self.samples + other.samples)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, GridField):
            self._same(other)
            return GridField(self.spec, self.samples - other.samples)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, GridField):
            self._same(other)
            return GridField(self.spec, self.samples * other.samples)
        if np.isscalar(other):
            return GridField(self.spec, self.samples * other)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return GridField(self.spec, -self.samples)

    @property
    def real(self):
        return GridField(self.spec, self.samples.real)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """DFT coefficients in FFT index order (see module docstring)."""

    spec: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != self.spec.sizes:
            raise ValidationError(
                f"coefficient array {c.shape} does not match grid {self.spec.sizes}")
        _check_finite(c)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def support(self):
        """Boolean mask of exactly nonzero coefficients."""
        return self.coeffs != 0


def forward_transform(u: GridField) -> SpectralField:
    return SpectralField(u.spec, _fft.fftn(u.samples) / u.spec.npoints)


def inverse_transform(U: SpectralField) -> GridField:
    return GridField(U.spec, _fft.ifftn(U.coeffs) * U.spec.npoints)


def apply_multiplier(u: GridField, mask) -> GridField:
    """Fourier multiplier: ``inverse(mask * forward(u))``."""
    c = _fft.fftn(u.samples) * mask
    return GridField(u.spec, _fft.ifftn(c))


def lp_norm(u: GridField, p) -> float:
    """Rectangle-rule ``L_p`` quasi-norm, ``p`` in ``(0, inf]``."""
    p = float(p)
    if not p > 0:
        raise ValidationError(f"p must be positive, got {p}")
    a = np.abs(u.samples)
    if np.isinf(p):
        return float(a.max())
    if p == 1.0:
        s = a.sum()
    elif p == 2.0:
        s = np.sum(a * a)
    else:
        s = np.power(a, p).sum()
    return float((s * u.spec.cell_volume) ** (1.0 / p))


def pairing(u: GridField, phi: GridField) -> complex:
    """Quadrature of ``u * phi`` (bilinear, no conjugation)."""
    u._same(phi)
    return complex(np.sum(u.samples * phi.samples) * u.spec.cell_volume)


def restrict_hyperplane(u: GridField, axis=-1, plane_index=0) -> GridField:
    if u.spec.ndim < 2:
        raise ValidationError("restriction needs at least two dimensions")
    axis = _norm_axis(axis, u.spec.ndim)
    n = u.spec.sizes[axis]
    if not 0 <= plane_index < n:
        raise ValidationError(f"plane index {plane_index} out of range [0, {n})")
    return GridField(u.spec.drop_axis(axis),
                     np.take(u.samples, plane_index, axis=axis).copy())


def tensor_with_delta(v: GridField, target: GridSpec, axis=-1) -> GridField:
    """Place ``v / h_axis`` on the plane ``x_axis = 0`` of ``target``."""
    axis = _norm_axis(axis, target.ndim)
    if target.drop_axis(axis) != v.spec:
        raise ValidationError("field grid does not match the target hyperplane")
    out = np.zeros(target.sizes, dtype=v.samples.dtype)
    idx = [slice(None)] * target.ndim
    idx[axis] = 0
    out[tuple(idx)] = v.samples / target.steps[axis]
    return GridField(target, out)


def dilate_integer(u: GridField, k: int) -> GridField:
    """Samples of ``x -> u(k x mod L)``; maps mode ``m`` to mode ``k m``."""
    k = int(k)
    if k < 1:
        raise ValidationError("dilation factor must be a positive integer")
    idx = np.ix_(*[(k * np.arange(n)) % n for n in u.spec.sizes])
    return GridField(u.spec, u.samples[idx])


def translate_by_grid_shift(u: GridField, shifts: Sequence[int]) -> GridField:
    """Exact circular shift: result at index ``m`` is ``u`` at ``m - shift``."""
    shifts = tuple(int(s) for s in np.atleast_1d(shifts))
    if len(shifts) != u.spec.ndim:
        raise ValidationError("one shift per axis required")
    return GridField(u.spec, np.roll(u.samples, shifts, axis=tuple(range(u.spec.ndim))))


def write_gfld(path, u: GridField):
    """Write a field in the GFLD1 little-endian binary format."""
    spec = u.spec
    is_complex = np.iscomplexobj(u.samples)
    header = bytearray(_MAGIC)
    header += struct.pack("<B", spec.ndim)
    header += struct.pack(f"<{spec.ndim}I", *spec.sizes)
    header += struct.pack(f"<{spec.ndim}d", *spec.periods)
    header += struct.pack("<B", 1 if is_complex else 0)
    data = np.ascontiguousarray(u.samples, dtype="<c16" if is_complex else "<f8")
    with open(path, "wb") as fh:
        fh.write(bytes(header))
        fh.write(data.tobytes(order="C"))


def read_gfld(path) -> GridField:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        if raw[:5] != _MAGIC:
            raise ValidationError("not a GFLD1 file (bad magic)")
        pos = 5
        (ndim,) = struct.unpack_from("<B", raw, pos)
        pos += 1
        if not 1 <= ndim <= 3:
            raise ValidationError(f"GFLD1: bad ndim {ndim}")
        sizes = struct.unpack_from(f"<{ndim}I", raw, pos)
        pos += 4 * ndim
        periods = struct.unpack_from(f"<{ndim}d", raw, pos)
        pos += 8 * ndim
        (dtype,) = struct.unpack_from("<B", raw, pos)
        pos += 1
    except struct.error as exc:
        raise ValidationError(f"GFLD1: truncated header ({exc})") from None
    if dtype not in (0, 1):
        raise ValidationError(f"GFLD1: unknown dtype code {dtype}")
    spec = GridSpec(tuple(sizes), tuple(periods))
    itemsize = 16 if dtype else 8
    expected = spec.npoints * itemsize
    if len(raw) - pos != expected:
        raise ValidationError(
            f"GFLD1: payload has {len(raw) - pos} bytes, expected {expected}")
    data = np.frombuffer(raw, dtype="<c16" if dtype else "<f8", offset=pos)
    return GridField(spec, data.reshape(spec.sizes).astype(complex if dtype else float))
