"""
Trace on a coordinate hyperplane, the extension operator and the dual
estimate.

The trace is the sum of the restrictions of the radial blocks to the plane
``x_axis = 0``. On a finite grid the blocks sum to the field, so the result
agrees with pointwise restriction up to rounding; the value of the block
form is the per-shell bookkeeping carried in :class:`TraceDiagnostics`.

The extension ``K`` lifts every hyperplane block ``v_j`` to
``psi(2**j x_n) v_j(x')`` with a band-limited profile ``psi`` whose spectrum
lives in ``[-1, 1]`` and with ``psi(0) = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from . import _fft
from .besov import BesovParams, besov_norm, mixed_norm
from .errors import GuardViolation, ValidationError
from .grid import GridField, GridSpec, _norm_axis, lp_norm, restrict_hyperplane, tensor_with_delta
from .littlewood_paley import RadialPartition, TensorPartition, iter_blocks, iter_theta_blocks


@dataclass(frozen=True, eq=False)
class TraceDiagnostics:
    partial_traces: list
    increments: np.ndarray
    target: str
    trace: GridField
    verdict: str


def _target_norm(r, target, Pp):
    if isinstance(target, BesovParams):
        # blocks of the restriction are analyzed on the hyperplane partition
        return besov_norm(r, target, Pp)
    return lp_norm(r, target)


def _target_label(target):
    if isinstance(target, BesovParams):
        return f"B^{target.s:g}_{{{target.p:g},{target.q:g}}}"
    return f"L_{float(target):g}"


def _verdict(inc):
    if inc.size < 2 or inc.max() == 0:
        return "converging"
    half = inc.size // 2
    head, tail = inc[:half].max(), inc[half:].max()
    if tail <= 1e-12 * inc.max():
        return "converged"
    grow = np.all(np.diff(inc[half:]) >= 0)
    if tail >= head and grow:
        return "diverging"
    return "converging" if tail < head else "non-decaying"


def trace_gamma0(u: GridField, P: RadialPartition, target=2.0, axis=-1,
                 keep_partials=True):
    """Trace of ``u`` on ``x_axis = 0`` via restricted radial blocks.

    Parameters
    ----------
    target
        Norm used for the per-shell increments: an ``L_p`` exponent or a
        :class:`BesovParams` (evaluated with the hyperplane partition).

    Returns
    -------
    trace : GridField
    diagnostics : TraceDiagnostics
    """
    if u.spec.ndim < 2:
        raise ValidationError("trace needs at least two dimensions")
    Pp = P.hyperplane(axis)
    total = None
    partials, inc = [], []
    for _, b in iter_blocks(u, P):
        r = restrict_hyperplane(b, axis, 0)
        total = r.samples.copy() if total is None else total + r.samples
        inc.append(_target_norm(r, target, Pp))
        if keep_partials:
            partials.append(GridField(Pp.spec, total.copy()))
    trace = GridField(Pp.spec, total)
    inc = np.array(inc)
    return trace, TraceDiagnostics(partials, inc, _target_label(target), trace, _verdict(inc))


@dataclass(frozen=True, eq=False)
class ContinuityProfile:
    """Slice norms ``t -> ||u(., t)||_p`` and their shell-sum bound."""

    p: float
    plane_norms: np.ndarray
    modulus: float
    shell_mixed: np.ndarray
    shell_lp: np.ndarray

    @property
    def lam(self):
        return min(1.0, self.p)

    @property
    def bound(self):
        """``(sum_j mixed_j**lam)**(1/lam)``, dominating every slice norm."""
        lam = self.lam
        return float(np.sum(self.shell_mixed ** lam) ** (1 / lam))

    def shell_bound(self, c):
        """The same sum with each mixed norm replaced by ``c 2**(j/p) ||u_j||_p``."""
        lam = self.lam
        j = np.arange(self.shell_lp.size)
        terms = c * 2.0 ** (j / self.p) * self.shell_lp
        return float(np.sum(terms ** lam) ** (1 / lam))


def continuity_profile(u: GridField, P: RadialPartition, p, axis=-1) -> ContinuityProfile:
    if u.spec.ndim < 2:
        raise ValidationError("continuity profile needs at least two dimensions")
    axis = _norm_axis(axis, u.spec.ndim)
    p = float(p)
    total = None
    mixed, lps = [], []
    for _, b in iter_blocks(u, P):
        total = b.samples.copy() if total is None else total + b.samples
        mixed.append(mixed_norm(b, p, axis))
        lps.append(lp_norm(b, p))
    planes = np.moveaxis(total, axis, 0)
    hspec = u.spec.drop_axis(axis)
    norms = np.array([lp_norm(GridField(hspec, planes[t]), p) for t in range(planes.shape[0])])
    diffs = np.diff(np.concatenate([planes, planes[:1]]), axis=0)
    modulus = max(lp_norm(GridField(hspec, d), p) for d in diffs)
    return ContinuityProfile(p, norms, float(modulus), np.array(mixed), np.array(lps))


def shell_trace_ratios(block: GridField, j: int, p, axis=-1) -> dict:
    """Per-shell constants of the restriction and mixed-norm estimates.

    Both ratios divide by ``2**(j/p) ||block||_p``; uniformity in ``j`` is
    what the estimates assert.
    """
    p = float(p)
    full = lp_norm(block, p)
    if full == 0:
        raise ValidationError("zero block")
    scale = 2.0 ** (j / p) * full
    restricted = lp_norm(restrict_hyperplane(block, axis, 0), p)
    mixed = mixed_norm(block, p, axis)
    return {"restricted": restricted, "mixed": mixed, "full": full,
            "trace_ratio": restricted / scale, "mixed_ratio": mixed / scale}


def _bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    m = np.abs(s) < 1
    out[m] = np.exp(1.0 - 1.0 / (1.0 - s[m] ** 2))
    return out


@dataclass(frozen=True, eq=False)
class BandLimitedProfile:
    """One-dimensional profile described by its continuum spectrum.

    ``spectrum(w)`` is the Fourier transform ``int psi(x) exp(-i w x) dx``;
    it must vanish for ``|w| > bandwidth``.
    """

    spectrum: Callable
    bandwidth: float = 1.0
    name: str = "profile"

    def value_at_zero(self):
        val, _ = integrate.quad(lambda w: float(self.spectrum(np.array(w))),
                                -self.bandwidth, self.bandwidth, epsabs=1e-14, epsrel=1e-13)
        return val / (2 * np.pi)

    def coefficients(self, n, period, scale=1.0, normalize=True):
        """Grid coefficients of ``x -> psi(scale x)`` on an ``n``-point axis.

        The periodization of a dilated profile has coefficients
        ``spectrum(w / scale) / (scale * period)``; with ``normalize`` they
        are rescaled so the sample at the origin is exactly 1.
        """
        w = 2 * np.pi * np.fft.fftfreq(n, d=period / n)
        c = np.asarray(self.spectrum(w / scale), dtype=float) / (scale * period)
        if normalize:
            tot = c.sum()
            if tot == 0:
                raise GuardViolation("profile spectrum not resolved on this axis")
            c = c / tot
        return c

    def sample(self, spec: GridSpec, scale=1.0, normalize=True) -> GridField:
        if spec.ndim != 1:
            raise ValidationError("profiles live on 1-d grids")
        c = self.coefficients(spec.sizes[0], spec.periods[0], scale, normalize)
        return GridField(spec, (_fft.ifft(c) * spec.sizes[0]).real)

    def is_even(self, n_scan=1001):
        w = np.linspace(0, self.bandwidth, n_scan)
        return bool(np.array_equal(np.asarray(self.spectrum(w)), np.asarray(self.spectrum(-w))))

    def verify(self, n_scan=4001, tol=1e-10):
        """Check the spectral support and the normalization ``psi(0) = 1``."""
        w = np.linspace(-4 * self.bandwidth, 4 * self.bandwidth, n_scan)
        vals = np.asarray(self.spectrum(w), dtype=float)
        if np.any(vals[np.abs(w) > self.bandwidth] != 0):
            raise ValidationError(f"{self.name}: spectrum leaks outside the band")
        if not np.all(np.isfinite(vals)):
            raise ValidationError(f"{self.name}: spectrum not finite")
        if abs(self.value_at_zero() - 1.0) > tol:
            raise ValidationError(f"{self.name}: value at zero differs from 1")
        return True


def default_extension_profile() -> BandLimitedProfile:
    """Profile with a nonnegative smooth bump spectrum on ``[-1, 1]``.

    A nonnegative spectrum makes ``|psi| <= psi(0) = 1``.
    """
    area, _ = integrate.quad(lambda w: float(_bump(w)), -1, 1, epsabs=1e-15, epsrel=1e-13)
    const = 2 * np.pi / area
    return BandLimitedProfile(lambda w: const * _bump(w), 1.0, "bump-spectrum")


def _hyper_spec_of(P, axis):
    return P.spec.drop_axis(axis)


def k_summand_parts(v: GridField, P: RadialPartition, psi=None, axis=-1):
    """Yield ``(j, hyperplane coefficients, normal-axis coefficients)`` of each
    nonzero summand ``psi(2**j x_n) v_j(x')`` of the extension."""
    axis = _norm_axis(axis, P.spec.ndim)
    if _hyper_spec_of(P, axis) != v.spec:
        raise ValidationError("hyperplane field does not match the partition grid")
    psi = default_extension_profile() if psi is None else psi
    Pp = P.hyperplane(axis)
    V = _fft.fftn(v.samples) / v.spec.npoints
    nn, Ln = P.spec.sizes[axis], P.spec.periods[axis]
    nyq = P.spec.nyquist(axis)
    for j in range(P.J_max + 1):
        vj = V * Pp.mask(j)
        if not np.any(vj):
            continue
        if psi.bandwidth * 2.0 ** j > nyq:
            raise GuardViolation(
                f"profile at shell {j} needs bandwidth {psi.bandwidth * 2 ** j:g}, "
                f"normal axis resolves {nyq:g}")
        yield j, vj, psi.coefficients(nn, Ln, 2.0 ** j)


def _outer(a, b, axis, ndim):
    shape_a = list(a.shape)
    shape_a.insert(axis, 1)
    shape_b = [1] * ndim
    shape_b[axis] = -1
    return a.reshape(shape_a) * b.reshape(shape_b)


def k_summand_spectra(v, P, psi=None, axis=-1):
    """Yield ``(j, coefficient array)`` for every summand on the full grid."""
    axis = _norm_axis(axis, P.spec.ndim)
    for j, vj, cj in k_summand_parts(v, P, psi, axis):
        yield j, _outer(vj, cj, axis, P.spec.ndim)


def extension_K(v: GridField, P: RadialPartition, psi=None, axis=-1) -> GridField:
    """Extension ``K v = sum_j psi(2**j x_n) (Phi'_j v)(x')``.

    ``P`` is the radial partition of the full grid; the hyperplane blocks use
    its restriction. ``psi`` defaults to :func:`default_extension_profile`.
    """
    axis = _norm_axis(axis, P.spec.ndim)
    psi = default_extension_profile() if psi is None else psi
    total = np.zeros(P.spec.sizes, dtype=complex)
    for _, coeffs in k_summand_spectra(v, P, psi, axis):
        total += coeffs
    out = _fft.ifftn(total) * P.spec.npoints
    if np.isrealobj(v.samples) and psi.is_even():
        # real input and a real even profile: the imaginary part is dust
        out = out.real.copy()
    return GridField(P.spec, out)


def annulus_violations(coeffs, spec: GridSpec, j: int, A=3.0, upper=None) -> int:
    """Count nonzero coefficients outside the shell ``[2**j/A, A 2**j]``.

    Shell 0 only has the outer bound. ``upper`` overrides the outer radius
    factor (e.g. the realized ``sqrt(1.3**2 + 1)``).
    """
    r = spec.frequency_radius()
    hi = (A if upper is None else upper) * 2.0 ** j
    lo = 0.0 if j == 0 else 2.0 ** j / A
    outside = (r > hi * (1 + 1e-12)) | (r < lo * (1 - 1e-12))
    return int(np.count_nonzero(coeffs[outside]))


def dual_block_factors(u: GridField, J, k, T: TensorPartition, axis=-1):
    """Separable factors of the ``(J, k)`` tensor block of ``u (x) delta_0``.

    Returns ``(a, b)`` with ``a`` on the hyperplane grid and ``b`` on the
    normal axis such that the block equals ``a(x') b(x_n)``.
    """
    axis = _norm_axis(axis, T.spec.ndim)
    if T.spec.drop_axis(axis) != u.spec:
        raise ValidationError("hyperplane field does not match the tensor grid")
    facs = T.factors(J, k)
    theta = facs[axis]
    eta = 1.0
    rest = [f for i, f in enumerate(facs) if i != axis]
    for i, f in enumerate(rest):
        shape = [1] * u.spec.ndim
        shape[i] = -1
        eta = eta * f.reshape(shape)
    a = _fft.ifftn(_fft.fftn(u.samples) * eta)
    nn, Ln = T.spec.sizes[axis], T.spec.periods[axis]
    b = _fft.ifft(theta.astype(complex)) * nn / Ln
    nspec = GridSpec((nn,), (Ln,))
    return GridField(u.spec, a), GridField(nspec, b)


def dual_norm_B(u: GridField, p, T: TensorPartition, axis=-1, method="factorized") -> float:
    """``sup_{J,k} 2**(k (1/p - 1)) ||Theta_{J,k} block of u (x) delta_0||_p``.

    ``method="direct"`` forms the tensor with the discrete delta and runs the
    tensor analysis on the full grid; ``"factorized"`` uses the separable
    structure of every block and only needs 1-d and hyperplane transforms.
    """
    p = float(p)
    axis = _norm_axis(axis, T.spec.ndim)
    best = 0.0
    if method == "direct":
        w = tensor_with_delta(u, T.spec, axis)
        for (J, k), blk in iter_theta_blocks(w, T):
            best = max(best, 2.0 ** (k * (1 / p - 1)) * lp_norm(blk, p))
        return best
    if method != "factorized":
        raise ValidationError(f"unknown method {method!r}")
    for J, k in T.keys():
        a, b = dual_block_factors(u, J, k, T, axis)
        best = max(best, 2.0 ** (k * (1 / p - 1)) * lp_norm(a, p) * lp_norm(b, p))
    return best


def dual_estimate_ratio(u: GridField, p, T: TensorPartition, axis=-1, method="factorized") -> float:
    B = dual_norm_B(u, p, T, axis, method)
    if B == 0:
        raise ValidationError("dual ratio undefined for the zero field")
    return lp_norm(u, p) / B
