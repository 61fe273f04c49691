import numpy as np
import pytest
from scipy import integrate

from besovlab import BesovParams, GridField, GridSpec, GuardViolation, ValidationError, besov_norm
from besovlab.counterexamples import (E_omega_N, E_omega_N_series, Profiles, T_on_vk,
                                      find_point_layout, kernel, omega_N, omega_series_B,
                                      omega_terms, psi_k_family, psi_k_lateral,
                                      scaled_delta_family, smooth_test_function, v_k_family,
                                      vk_budget, window_dilates)
from besovlab.experiments.fitting import fit_power_law
from besovlab.grid import lp_norm, pairing, restrict_hyperplane, translate_by_grid_shift
from besovlab.littlewood_paley import build_radial_partition

TWO_PI = 2 * np.pi


@pytest.fixture(scope="module")
def prof():
    return Profiles.for_period(TWO_PI)


def test_profiles_verify(prof):
    res = prof.verify()
    assert max(res.values()) <= 1e-10
    assert prof.phi(0.0) == 1.0
    assert prof.phi(prof.phi_outer * 1.01) == 0.0


def test_smooth_test_function_value_at_origin():
    u = smooth_test_function(GridSpec((16, 32), (1.0, 2.0)))
    assert u.samples[0, 0] == 1.0
    assert np.all(u.samples <= 1.0)


# --- scaled deltas and psi_k ----------------------------------------------

def test_scaled_delta_k1_is_eta(prof):
    spec = GridSpec.cube(256, 2)
    u = scaled_delta_family(prof, 1, spec)
    r = np.hypot(*spec.mesh(centered=True))
    assert np.abs(u.samples - prof.eta(r, 2)).max() <= 1e-13 * u.samples.max()


@pytest.mark.parametrize("N, tol", [(256, 1e-7), (512, 1e-9), (1024, 1e-13)])
def test_scaled_delta_unit_mass(prof, N, tol):
    spec = GridSpec.cube(N, 2)
    u = scaled_delta_family(prof, 1, spec)
    assert abs(pairing(u, GridField(spec, np.ones(spec.sizes))) - 1.0) <= tol


@pytest.mark.parametrize("p", ["1/3", "1/2", "2/3"])
def test_scaled_delta_exponent(prof, p):
    from besovlab.besov import parse_exponent
    pv = parse_exponent(p)
    spec = GridSpec.cube(512, 2)
    fit = fit_power_law((k, lp_norm(scaled_delta_family(prof, k, spec), pv)) for k in range(1, 9))
    assert fit.exponent == pytest.approx(2 * (1 - 1 / pv), abs=0.05)


def test_scaled_delta_guard(prof):
    spec = GridSpec.cube(64, 2)
    with pytest.raises(GuardViolation):
        scaled_delta_family(prof, 50, spec)
    with pytest.raises(GuardViolation):
        scaled_delta_family(Profiles.for_period(4 * TWO_PI), 1, spec)   # support too wide


def test_psi_k1_is_product(prof):
    spec = GridSpec.cube(128, 2)
    u = psi_k_family(prof, 1, spec)
    x, y = spec.mesh(centered=True)
    assert np.allclose(u.samples, prof.eta(np.abs(x), 1) * prof.phi(y), atol=0)
    assert np.allclose(restrict_hyperplane(u).samples,
                       psi_k_lateral(prof, 1, spec.drop_axis(-1)).samples)


def test_psi_k_lateral_exponent(prof):
    hspec = GridSpec((1024,))
    fit = fit_power_law((k, lp_norm(psi_k_lateral(prof, k, hspec), 0.5)) for k in range(1, 9))
    assert fit.exponent == pytest.approx(-1.0, abs=0.05)


def test_psi_k_trace_pairing_tends_to_one(prof):
    spec = GridSpec.cube(512, 2)
    test = smooth_test_function(spec.drop_axis(-1))
    errs = [abs(pairing(restrict_hyperplane(psi_k_family(prof, k, spec)), test) - 1)
            for k in (1, 2, 4, 8)]
    assert np.all(np.diff(errs) < 0)


# --- v_k ------------------------------------------------------------------

@pytest.mark.parametrize("N, budget", [(1024, 3), (4096, 4)])
def test_vk_budget(N, budget):
    assert vk_budget(GridSpec.cube(N, 2, TWO_PI * 8)) == budget


def test_vk_single_term_at_origin():
    L = TWO_PI * 8
    spec = GridSpec.cube(256, 2, L)
    prof = Profiles.for_period(L)
    v = v_k_family(prof, 1, spec)
    assert np.isrealobj(v.samples)
    # k = 1: one term 4 f(4x') g(4x_n); f(0) = (1/2 pi) int f_hat, g(0) = 1
    f0, _ = integrate.quad(lambda t: float(prof.f_hat(abs(t))), -prof.band, prof.band)
    assert v.samples[0, 0] == pytest.approx(4 * f0 / TWO_PI, rel=1e-5)


def test_vk_trace_is_T_side():
    # g(0) = 1 for every dilate, so v_k(x', 0) is the closed form of T v_k up
    # to the periodic images of g along the normal axis, which die off in k
    L = TWO_PI * 8
    spec = GridSpec.cube(1024, 2, L)
    prof = Profiles.for_period(L)
    errs = []
    for k in (1, 2, 3):
        a = restrict_hyperplane(v_k_family(prof, k, spec)).samples
        b = T_on_vk(prof, k, spec.drop_axis(-1)).samples
        errs.append(np.abs(a - b).max() / np.abs(b).max())
    assert errs[0] <= 1e-5
    assert errs[-1] <= 1e-10
    assert np.all(np.diff(errs) < 0)


def test_vk_guard():
    spec = GridSpec.cube(256, 2, TWO_PI * 8)
    with pytest.raises(GuardViolation):
        v_k_family(Profiles.for_period(TWO_PI * 8), 3, spec)
    with pytest.raises(ValidationError):
        v_k_family(Profiles.for_period(TWO_PI * 8), 1, GridSpec((256,)))


# --- omega_N ----------------------------------------------------------------

@pytest.fixture(scope="module")
def omega_grid():
    spec = GridSpec((1 << 14,), (TWO_PI * 64,))
    return spec, build_radial_partition(spec)


def test_point_layout_fits(omega_grid):
    spec, P = omega_grid
    lay = find_point_layout(P, 4)
    h = spec.steps[0]
    gaps = np.diff(lay.center_indices) * h
    assert np.all(gaps >= 3 * lay.R)
    assert lay.center_indices[-1] < spec.sizes[0]
    assert lay.delta < lay.R
    k = kernel(P.mask(0), spec).samples.real
    r = np.abs(spec.coords(0, centered=True))
    assert np.all(k[r < lay.delta] > lay.kernel_peak / 2)
    assert np.all(np.abs(k[r > lay.R]) < lay.kernel_peak / (2 * 4))


def test_point_layout_guards(omega_grid):
    _, P = omega_grid
    with pytest.raises(ValidationError):
        find_point_layout(P, 0)
    with pytest.raises(GuardViolation):
        omega_N(P, find_point_layout(P, P.J_max + 1))


def test_omega_1_is_translated_kernel_and_shift_invariant(omega_grid):
    spec, P = omega_grid
    lay = find_point_layout(P, 1)
    om = omega_N(P, lay)
    ref = translate_by_grid_shift(kernel(P.psi(1), spec), [lay.center_indices[0]])
    assert np.array_equal(om.samples, ref.samples)
    bp = BesovParams(1.0, 0.5, np.inf)
    moved = translate_by_grid_shift(om, [123])
    assert besov_norm(moved, bp, P) == pytest.approx(besov_norm(om, bp, P), rel=1e-10)


@pytest.mark.parametrize("q", [0.5, 1.0, 2.0])
def test_omega_series_B_close_to_scaling_law(omega_grid, q):
    # realized term norms follow the continuum scaling up to a few percent
    spec, P = omega_grid
    k0 = lp_norm(kernel(P.psi(0), spec), 0.5)
    for N in (1, 3, 5):
        B = omega_series_B(P, find_point_layout(P, N), 0.5, q)
        assert B == pytest.approx(N ** (1 / q) * k0, rel=0.05)


def test_omega_terms_count(omega_grid):
    _, P = omega_grid
    assert len(omega_terms(P, find_point_layout(P, 3))) == 3


# --- E omega_N ---------------------------------------------------------------

def test_window_dilates_normalized():
    nspec = GridSpec((4096,), (TWO_PI * 16,))
    prof = Profiles.for_period(TWO_PI)
    for k in (1, 3):
        w = window_dilates(prof, k, nspec)
        assert w.samples[0] == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(GuardViolation):
        window_dilates(prof, 12, nspec)


def test_E_omega_trace_and_materialize():
    hspec = GridSpec((1024,), (TWO_PI * 16,))
    nspec = GridSpec((512,), (TWO_PI * 4,))
    P = build_radial_partition(hspec)
    prof = Profiles.for_period(TWO_PI)
    lay = find_point_layout(P, 2)
    ser = E_omega_N_series(prof, P, lay, nspec)
    assert np.abs(ser.trace().samples - omega_N(P, lay).samples).max() <= 1e-12
    full = E_omega_N(prof, P, lay, nspec)
    assert full.spec.sizes == (1024, 512)
    assert np.array_equal(restrict_hyperplane(full).samples, ser.trace().samples)
    norms = ser.term_norms(1.0)
    assert len(norms) == 2 and all(n > 0 for n in norms)
