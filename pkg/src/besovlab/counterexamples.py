"""
Explicit field families used to probe sharpness of the trace estimates.

Every family is built on a declared grid with its resolution budget
enforced up front: dyadically scaled objects exhaust a grid quickly, and a
silent alias is worse than a refusal. Profiles are given analytically
(compact bumps in space, or bump spectra in frequency) so dilations are
exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma, pi

import numpy as np
from scipy import integrate

from . import _fft
from .errors import GuardViolation, ValidationError
from .grid import GridField, GridSpec, _norm_axis, lp_norm, translate_by_grid_shift
from .littlewood_paley import RadialPartition, smooth_step
from .trace_ext import _bump


def _sphere_area(d):
    return 2 * pi ** (d / 2) / gamma(d / 2)


def _quad(f, a, b):
    val, _ = integrate.quad(f, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


_BUMP_AREA = _quad(lambda t: float(_bump(t)), -1, 1)


def _bump_moment(d):
    """``int_{R^d} bump(|x|) dx``."""
    return _sphere_area(d) * _quad(lambda r: r ** (d - 1) * float(_bump(r)), 0, 1)


@dataclass(frozen=True)
class Profiles:
    """Analytic ingredients of the families.

    Attributes
    ----------
    eta_radius : float
        Support radius of the compact bump ``eta`` (unit integral in any
        dimension).
    phi_inner, phi_outer : float
        ``phi`` equals 1 for ``|t| <= phi_inner`` and 0 beyond ``phi_outer``.
    band : float
        Spectral radius of ``f`` and ``g``.
    window : tuple
        Open interval carrying the spectrum of the annular window ``eta_ann``.
    """

    eta_radius: float
    phi_inner: float
    phi_outer: float
    band: float = 0.5
    window: tuple = (1.0, 2.0)

    @classmethod
    def for_period(cls, period):
        """Support budget ``diameter <= period / 4`` for the compact profiles."""
        return cls(eta_radius=period / 8, phi_inner=period / 16, phi_outer=period / 8)

    # compact bump with unit integral
    def eta(self, r, d):
        """``eta`` at radius ``r`` in ``d`` dimensions."""
        return _bump(np.asarray(r) / self.eta_radius) / (self.eta_radius ** d * _bump_moment(d))

    def phi(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        return smooth_step((t - self.phi_inner) / (self.phi_outer - self.phi_inner))

    # spectra; continuum transform convention int f(x) exp(-i x xi) dx
    def f_hat(self, xi_radius):
        """Radial spectrum of ``f``; ``f_hat(0) = 1`` makes ``int f = 1``."""
        return _bump(np.asarray(xi_radius) / self.band)

    def g_hat(self, w):
        """Spectrum of ``g`` scaled so that ``g(0) = 1``."""
        return (2 * pi / (self.band * _BUMP_AREA)) * _bump(np.asarray(w) / self.band)

    def window_hat(self, w):
        """Spectrum of ``eta_ann``, supported in the open window, with
        inverse transform equal to 1 at the origin."""
        a, b = self.window
        mid, half = (a + b) / 2, (b - a) / 2
        return (2 * pi / (half * _BUMP_AREA)) * _bump((np.asarray(w) - mid) / half)

    def verify(self, tol=1e-10):
        """Quadrature checks of every normalization; returns the residuals."""
        res = {}
        for d in (1, 2, 3):
            val = _sphere_area(d) * _quad(lambda r: r ** (d - 1) * float(self.eta(r, d)),
                                          0, self.eta_radius)
            res[f"eta_integral_{d}d"] = abs(val - 1)
        res["f_hat_at_0"] = abs(float(self.f_hat(0.0)) - 1)
        res["g_at_0"] = abs(_quad(lambda w: float(self.g_hat(w)), -self.band, self.band)
                            / (2 * pi) - 1)
        a, b = self.window
        res["window_at_0"] = abs(_quad(lambda w: float(self.window_hat(w)), a, b) / (2 * pi) - 1)
        w = np.linspace(-4, 4, 8001)
        if np.any(self.g_hat(w)[np.abs(w) >= self.band] != 0):
            raise ValidationError("g spectrum leaks outside its ball")
        if np.any(self.f_hat(np.abs(w))[np.abs(w) >= self.band] != 0):
            raise ValidationError("f spectrum leaks outside its ball")
        if np.any(self.window_hat(w)[(w <= a) | (w >= b)] != 0):
            raise ValidationError("window spectrum leaks outside its interval")
        bad = {k: v for k, v in res.items() if v > tol}
        if bad:
            raise ValidationError(f"profile normalizations off: {bad}")
        return res


def _radius(spec, axes=None):
    axes = range(spec.ndim) if axes is None else axes
    mesh = spec.mesh(centered=True)
    r2 = 0.0
    for i in axes:
        r2 = r2 + mesh[i] ** 2
    return np.sqrt(r2)


def smooth_test_function(spec: GridSpec) -> GridField:
    """``prod_i exp(cos(2 pi x_i / L_i) - 1)``: smooth, periodic, value 1 at 0."""
    out = 1.0
    for i, x in enumerate(spec.mesh()):
        out = out * np.exp(np.cos(2 * pi * x / spec.periods[i]) - 1)
    return GridField(spec, np.broadcast_to(out, spec.sizes).copy())


def dilation_budget(spec: GridSpec, diameter) -> int:
    """Largest ``k`` for which a support of ``diameter`` shrunk by ``k`` still
    spans eight grid steps on every axis."""
    return int(np.floor(diameter / (8 * max(spec.steps))))


def _check_support_budget(profiles, spec, axes):
    for i in axes:
        if 2 * profiles.eta_radius > spec.periods[i] / 4 * (1 + 1e-12):
            raise GuardViolation("bump support exceeds a quarter period")


def scaled_delta_family(profiles: Profiles, k: int, spec: GridSpec) -> GridField:
    """``k**n eta(k x)``, tending to the point mass as ``k`` grows."""
    _check_support_budget(profiles, spec, range(spec.ndim))
    kmax = dilation_budget(spec, 2 * profiles.eta_radius)
    if not 1 <= k <= kmax:
        raise GuardViolation(f"dilation k={k} outside resolved range 1..{kmax}")
    n = spec.ndim
    return GridField(spec, float(k) ** n * profiles.eta(k * _radius(spec), n))


def psi_k_family(profiles: Profiles, k: int, spec: GridSpec, axis=-1) -> GridField:
    """``k**(n-1) eta(k x') phi(x_n)`` with ``x_n`` the coordinate along ``axis``."""
    if spec.ndim < 2:
        raise ValidationError("psi_k needs at least two dimensions")
    axis = _norm_axis(axis, spec.ndim)
    hyper = [i for i in range(spec.ndim) if i != axis]
    _check_support_budget(profiles, spec, hyper)
    kmax = dilation_budget(spec.drop_axis(axis), 2 * profiles.eta_radius)
    if not 1 <= k <= kmax:
        raise GuardViolation(f"dilation k={k} outside resolved range 1..{kmax}")
    if 2 * profiles.phi_outer > spec.periods[axis] / 2:
        raise GuardViolation("phi support does not fit the normal axis")
    d = spec.ndim - 1
    lateral = float(k) ** d * profiles.eta(k * _radius(spec, hyper), d)
    normal = profiles.phi(spec.mesh(centered=True)[axis])
    return GridField(spec, np.broadcast_to(lateral * normal, spec.sizes).copy())


def psi_k_lateral(profiles: Profiles, k: int, hspec: GridSpec) -> GridField:
    """The hyperplane factor ``k**(n-1) eta(k x')`` carried by the T-side."""
    kmax = dilation_budget(hspec, 2 * profiles.eta_radius)
    if not 1 <= k <= kmax:
        raise GuardViolation(f"dilation k={k} outside resolved range 1..{kmax}")
    d = hspec.ndim
    return GridField(hspec, float(k) ** d * profiles.eta(k * _radius(hspec), d))


def vk_budget(spec: GridSpec, band=0.5) -> int:
    """Largest ``k`` whose finest term ``f(4**k x)`` keeps its spectrum within
    half the Nyquist frequency of every axis."""
    nyq = min(spec.nyquist(i) for i in range(spec.ndim))
    k = 0
    while 4.0 ** (k + 1) * band <= nyq / 2:
        k += 1
    return k


def _radial_hat_coeffs(spec, hat, scale):
    """Coefficients of the periodization of ``scale**d f(scale x)`` where
    ``f`` has the radial spectrum ``hat``."""
    r = spec.frequency_radius()
    return hat(r / scale) / spec.volume


def _vk_terms(k):
    return range(k + 1, 2 * k + 1)


def v_k_family(profiles: Profiles, k: int, spec: GridSpec, axis=-1) -> GridField:
    """``(1/k) sum_{l=k+1}^{2k} 2**(l(n-1)) f(2**l x') g(2**l x_n)``.

    Built in frequency space: term ``l`` has coefficients
    ``2**-l f_hat(xi'/2**l) g_hat(xi_n/2**l) / volume``.
    """
    if spec.ndim < 2:
        raise ValidationError("v_k needs at least two dimensions")
    axis = _norm_axis(axis, spec.ndim)
    budget = vk_budget(spec, profiles.band)
    if not 1 <= k <= budget:
        raise GuardViolation(f"v_k with k={k} outside resolved range 1..{budget}")
    hspec = spec.drop_axis(axis)
    wn = spec.frequencies(axis)
    total = np.zeros(spec.sizes, dtype=complex)
    shape = [1] * spec.ndim
    shape[axis] = -1
    for l in _vk_terms(k):
        s = 2.0 ** l
        lat = _radial_hat_coeffs(hspec, profiles.f_hat, s)
        nor = profiles.g_hat(wn / s) / (s * spec.periods[axis])
        total += np.expand_dims(lat, axis) * nor.reshape(shape)
    total /= k
    # the spectrum is real and even, so the field is real
    return GridField(spec, _fft.ifftn(total).real * spec.npoints)


def T_on_vk(profiles: Profiles, k: int, hspec: GridSpec) -> GridField:
    """Closed form of the T-side: ``(1/k) sum_l 2**(l(n-1)) f(2**l x')``."""
    total = np.zeros(hspec.sizes, dtype=complex)
    for l in _vk_terms(k):
        total += _radial_hat_coeffs(hspec, profiles.f_hat, 2.0 ** l)
    total /= k
    return GridField(hspec, _fft.ifftn(total).real * hspec.npoints)


def kernel(mask, spec: GridSpec) -> GridField:
    """Inverse transform of a multiplier, i.e. the convolution kernel."""
    return GridField(spec, _fft.ifftn(np.asarray(mask, dtype=complex)) * spec.npoints / spec.volume)


@dataclass(frozen=True)
class PointLayout:
    """Centers ``x_1..x_N`` along the first axis, spaced at least ``3 R``."""

    N: int
    R: float
    delta: float
    spacing_index: int
    center_indices: tuple
    kernel_peak: float

    def centers(self, spec: GridSpec):
        h = spec.steps[0]
        return [m * h for m in self.center_indices]


def kernel_scan(P: RadialPartition):
    """Radius and value of the realized ``Phi_0`` kernel at every grid point."""
    k = kernel(P.mask(0), P.spec).samples.real
    return _radius(P.spec).ravel(), k.ravel()


def find_point_layout(P: RadialPartition, N: int) -> PointLayout:
    """Separation witnesses for the kernel of ``Phi_0`` and the centers.

    ``delta`` is the distance to the nearest point where the kernel drops to
    half its peak; ``R`` is the farthest radius where its modulus still
    reaches ``peak / (2N)``.
    """
    if N < 1:
        raise ValidationError("N must be positive")
    r, k = kernel_scan(P)
    peak = k[r == 0][0]
    delta = float(r[k <= peak / 2].min())
    big = np.abs(k) >= peak / (2 * N)
    R = float(r[big].max())
    half = min(P.spec.periods) / 2
    if R >= 0.99 * half:
        raise GuardViolation(f"kernel tail radius {R:g} reaches the torus half-period")
    h = P.spec.steps[0]
    step = int(np.ceil(3 * R / h))
    if N * step > P.spec.sizes[0]:
        raise GuardViolation(
            f"{N} centers spaced {3 * R:g} do not fit a period of {P.spec.periods[0]:g}")
    return PointLayout(N, R, delta, step, tuple(j * step for j in range(1, N + 1)), float(peak))


def omega_shell_budget(P: RadialPartition) -> int:
    return P.J_max


def _check_omega(P, N):
    if not 1 <= N <= omega_shell_budget(P):
        raise GuardViolation(f"N={N} exceeds the shell budget {omega_shell_budget(P)}")


def omega_terms(P: RadialPartition, layout: PointLayout):
    """Translated low-pass kernels ``Psi_k^vee(x - x_k)``, ``k = 1..N``."""
    _check_omega(P, layout.N)
    out = []
    for k, m in zip(range(1, layout.N + 1), layout.center_indices):
        shift = [m] + [0] * (P.spec.ndim - 1)
        out.append(translate_by_grid_shift(kernel(P.psi(k), P.spec), shift))
    return out


def omega_N(P: RadialPartition, layout: PointLayout) -> GridField:
    """``sum_{k=1}^N Psi_k^vee(x - x_k)``."""
    terms = omega_terms(P, layout)
    total = terms[0].samples.copy()
    for t in terms[1:]:
        total = total + t.samples
    return GridField(P.spec, total)


def omega_series_B(P: RadialPartition, layout: PointLayout, p, q) -> float:
    """Series constant of the ``omega_N`` terms with weights ``2**(k(n/p - n))``.

    The zeroth term is empty; term ``k`` sits in position ``k``.
    """
    from .besov import BesovParams, series_B_from_norms
    n = P.spec.ndim
    p = float(p)
    norms = [0.0] + [lp_norm(t, p) for t in omega_terms(P, layout)]
    return series_B_from_norms(norms, BesovParams(n / p - n, p, q))


@dataclass(frozen=True, eq=False)
class SeparableSeries:
    """Sum of products ``a_k(x') b_k(x_n)``, with ``x_n`` the last axis.

    Keeps the factors apart so traces and term norms are exact even when the
    full grid would not fit in memory.
    """

    lateral: list
    normal: list

    @property
    def hyper_spec(self):
        return self.lateral[0].spec

    @property
    def normal_spec(self):
        return self.normal[0].spec

    def trace(self) -> GridField:
        total = np.zeros(self.hyper_spec.sizes, dtype=complex)
        for a, b in zip(self.lateral, self.normal):
            total += b.samples[0] * a.samples
        return GridField(self.hyper_spec, total)

    def term_norms(self, p):
        return [lp_norm(a, p) * lp_norm(b, p) for a, b in zip(self.lateral, self.normal)]

    def materialize(self) -> GridField:
        spec = GridSpec(self.hyper_spec.sizes + self.normal_spec.sizes,
                        self.hyper_spec.periods + self.normal_spec.periods)
        total = np.zeros(spec.sizes, dtype=complex)
        for a, b in zip(self.lateral, self.normal):
            total += np.multiply.outer(a.samples, b.samples)
        return GridField(spec, total)


def window_dilates(profiles: Profiles, k: int, nspec: GridSpec) -> GridField:
    """``eta_ann^vee(2**k x_n)`` on the normal axis, equal to 1 at the origin."""
    if nspec.ndim != 1:
        raise ValidationError("normal axis grid must be 1-d")
    s = 2.0 ** k
    if profiles.window[1] * s > nspec.nyquist(0):
        raise GuardViolation(f"window at scale 2^{k} not resolved on the normal axis")
    w = nspec.frequencies(0)
    c = profiles.window_hat(w / s) / (s * nspec.periods[0])
    c = c / c.sum()
    return GridField(nspec, _fft.ifft(c) * nspec.sizes[0])


def E_omega_N_series(profiles: Profiles, P: RadialPartition, layout: PointLayout,
                     nspec: GridSpec) -> SeparableSeries:
    """Separable form of ``sum_k eta_ann^vee(2**k x_n) Psi_k^vee(x' - x'_k)``.

    ``P`` lives on the hyperplane grid; ``nspec`` is the normal axis.
    """
    lateral = omega_terms(P, layout)
    normal = [window_dilates(profiles, k, nspec) for k in range(1, layout.N + 1)]
    return SeparableSeries(lateral, normal)


def E_omega_N(profiles: Profiles, P: RadialPartition, layout: PointLayout,
              nspec: GridSpec) -> GridField:
    """Full-grid ``E omega_N`` (normal axis last)."""
    return E_omega_N_series(profiles, P, layout, nspec).materialize()
