"""
Seeded random fields.

Coefficients are drawn per analytic frequency in a fixed lexicographic
order, so a given seed describes the same trigonometric polynomial on every
grid that resolves it. That is what makes refinement comparisons meaningful.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import _fft
from ..errors import GuardViolation
from ..grid import GridField, GridSpec, lp_norm
from ..trace_ext import _bump


def trial_rngs(seed, count):
    """Independent generators for ``count`` trials derived from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def run_trials(fn, seed, count, threads=None):
    """Evaluate ``fn(index, rng)`` for every trial, results in trial order."""
    rngs = trial_rngs(seed, count)
    threads = _fft.get_threads() if threads is None else threads
    if threads <= 1:
        return [fn(i, r) for i, r in enumerate(rngs)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count), rngs))


def lattice(spec: GridSpec, radius, lower=0.0):
    """Integer frequency vectors with ``lower <= |xi| <= radius``.

    Returned as an ``(count, ndim)`` array in lexicographic order.
    """
    bounds = [int(np.floor(radius * L / (2 * np.pi))) for L in spec.periods]
    for b, n in zip(bounds, spec.sizes):
        if b >= n // 2:
            raise GuardViolation(f"band radius {radius:g} exceeds the grid's Nyquist frequency")
    axes = [np.arange(-b, b + 1) for b in bounds]
    m = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1)
    xi = m * (2 * np.pi / np.asarray(spec.periods))
    r = np.sqrt((xi * xi).sum(axis=1))
    keep = (r <= radius) & (r >= lower)
    return m[keep], r[keep]


def random_bandlimited(spec: GridSpec, rng, radius, lower=0.0, envelope=None, real=True):
    """Field with iid complex Gaussian coefficients on a frequency annulus.

    ``envelope(|xi|)`` shapes the amplitudes; ``real=True`` keeps the real
    part, which preserves the (symmetric) spectral support.
    """
    m, r = lattice(spec, radius, lower)
    z = rng.standard_normal((m.shape[0], 2)) @ np.array([1.0, 1j])
    if envelope is not None:
        z = z * envelope(r)
    if real:
        # real part of the trigonometric polynomial: (z_m + conj z_{-m}) / 2,
        # assembled on the half spectrum
        H = np.zeros(spec.half_shape, dtype=complex)
        for sign, vals in ((1, z / 2), (-1, np.conj(z) / 2)):
            mm = sign * m
            keep = mm[:, -1] >= 0
            idx = tuple(mm[keep, i] % spec.sizes[i] for i in range(spec.ndim))
            np.add.at(H, idx, vals[keep])
        return GridField(spec, _fft.irfftn(H, spec.sizes) * spec.npoints)
    C = np.zeros(spec.sizes, dtype=complex)
    idx = tuple((m[:, i] % spec.sizes[i]) for i in range(spec.ndim))
    C[idx] = z
    return GridField(spec, _fft.ifftn(C) * spec.npoints)


def power_envelope(decay):
    return lambda r: (1.0 + r) ** (-decay)


def random_block_series(spec, rng, J, s, p, A=1.0, annular=False):
    """Terms ``u_0..u_J`` with spectra in ``|xi| <= A 2**j`` (and above
    ``2**j / A`` for ``j > 0`` when ``annular``), each scaled so that
    ``||u_j||_p = w_j 2**(-s j)`` with random weights ``w_j`` in ``[0.5, 1.5]``.

    Returns the terms and their unit-normalized shapes so other smoothness
    values can reuse the draw.
    """
    weights = rng.uniform(0.5, 1.5, size=J + 1)
    shapes = []
    for j in range(J + 1):
        lo = 2.0 ** j / A if (annular and j > 0) else 0.0
        u = random_bandlimited(spec, rng, A * 2.0 ** j, lo)
        shapes.append(u * (1.0 / lp_norm(u, p)))
    terms = [w * 2.0 ** (-s * j) * b for j, (w, b) in enumerate(zip(weights, shapes))]
    return terms, shapes, weights


@dataclass(frozen=True)
class PacketFamily:
    """Blocks that are exactly self-similar along the last axis.

    Shell ``j`` block: ``sum_i a_i(x') beta_i(2**j x_n)``-type terms whose
    normal-axis spectrum is ``W(s) P_i(s) exp(-i s y_i)`` at ``s = xi_n/2**j``,
    with ``W`` a bump on ``[smin, smax]``. Lateral factors have spectra in a
    small ball so the block sits in shell ``j`` of the radial partition.
    """

    lateral: tuple
    polys: tuple
    offsets: tuple
    smin: float = 0.55
    smax: float = 1.2
    lateral_radius: float = 0.25

    @classmethod
    def draw(cls, rng, hspec: GridSpec, lateral_radius=0.25, max_terms=3):
        count = int(rng.integers(1, max_terms + 1))
        m, _ = lattice(hspec, lateral_radius)
        lat = []
        for _ in range(count):
            z = rng.standard_normal((m.shape[0], 2)) @ np.array([1.0, 1j])
            lat.append((m, z))
        polys = tuple(tuple(rng.standard_normal((3, 2)) @ np.array([1.0, 1j])) for _ in range(count))
        offs = np.concatenate([[0.0], rng.uniform(-2, 2, size=count - 1)])
        return cls(tuple(lat), polys, tuple(offs), lateral_radius=lateral_radius)

    def lateral_fields(self, hspec):
        out = []
        for m, z in self.lateral:
            C = np.zeros(hspec.sizes, dtype=complex)
            C[tuple(m[:, i] % hspec.sizes[i] for i in range(hspec.ndim))] = z
            out.append(_fft.ifftn(C) * hspec.npoints)
        return out

    def normal_factor(self, nspec_n, nspec_L, j, i):
        w = 2 * np.pi * np.fft.fftfreq(nspec_n, d=nspec_L / nspec_n)
        s = w / 2.0 ** j
        mid, half = (self.smin + self.smax) / 2, (self.smax - self.smin) / 2
        c0, c1, c2 = self.polys[i]
        spec = _bump((s - mid) / half) * (c0 + c1 * s + c2 * s * s) * np.exp(-1j * s * self.offsets[i])
        return _fft.ifft(spec) * nspec_n

    def block(self, spec: GridSpec, j: int) -> GridField:
        """Shell-``j`` block on ``spec`` (normal axis last)."""
        hspec = spec.drop_axis(-1)
        n, L = spec.sizes[-1], spec.periods[-1]
        if self.smax * 2.0 ** j >= spec.nyquist(spec.ndim - 1):
            raise GuardViolation(f"shell {j} packet exceeds the normal-axis Nyquist frequency")
        out = 0.0
        for i, a in enumerate(self.lateral_fields(hspec)):
            out = out + np.multiply.outer(a, self.normal_factor(n, L, j, i))
        return GridField(spec, out)
