import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st

from besovlab import GridField, GridSpec, ValidationError
from besovlab.counterexamples import Profiles, scaled_delta_family
from besovlab.experiments.corpus import random_bandlimited
from besovlab.grid import (apply_multiplier, dilate_integer, forward_transform,
                           inverse_transform, lp_norm, pairing, read_gfld, restrict_hyperplane,
                           tensor_with_delta, translate_by_grid_shift, write_gfld)
from besovlab.littlewood_paley import build_radial_partition, iter_blocks

TWO_PI = 2 * np.pi


# --- GridSpec -------------------------------------------------------------

@pytest.mark.parametrize("sizes", [(7,), (12,), (4,), (8, 8, 8, 8), ()])
def test_spec_rejects_bad_sizes(sizes):
    with pytest.raises(ValidationError):
        GridSpec(sizes)


@pytest.mark.parametrize("periods", [(0.0,), (-1.0,), (np.inf,), (1.0, 2.0, 3.0)])
def test_spec_rejects_bad_periods(periods):
    with pytest.raises(ValidationError):
        GridSpec((8, 8), periods)


def test_spec_basic_geometry():
    spec = GridSpec((16, 32), (1.0, 2.0))
    assert spec.npoints == 512
    assert spec.steps == (1 / 16, 2 / 32)
    assert spec.volume == pytest.approx(2.0)
    assert spec.nyquist(0) == pytest.approx(np.pi * 16)
    assert spec.drop_axis(0) == GridSpec((32,), (2.0,))
    assert spec.drop_axis(-1).insert_axis(1, 32, 2.0) == spec
    f = spec.frequencies(1)
    assert f[1] == pytest.approx(TWO_PI / 2.0)
    assert f[-1] == pytest.approx(-TWO_PI / 2.0)


def test_field_rejects_nonfinite_and_bad_shape():
    spec = GridSpec((8,))
    with pytest.raises(ValidationError):
        GridField(spec, np.full(8, np.nan))
    with pytest.raises(ValidationError):
        GridField(spec, np.zeros(9))
    u = GridField(spec, np.zeros(8))
    with pytest.raises(ValueError):
        u.samples[0] = 1.0


def test_field_arithmetic_and_grid_mismatch():
    a = GridField(GridSpec((8,)), np.arange(8.0))
    b = GridField(GridSpec((8,)), np.ones(8))
    assert np.array_equal((a + b).samples, np.arange(8.0) + 1)
    assert np.array_equal((2 * a - b).samples, 2 * np.arange(8.0) - 1)
    assert np.array_equal((-a).samples, -np.arange(8.0))
    with pytest.raises(ValidationError):
        a + GridField(GridSpec((16,)), np.zeros(16))


# --- transforms -----------------------------------------------------------

@pytest.mark.parametrize("sizes", [(8,), (16, 8), (8, 8, 16)])
def test_constant_has_unit_mean_coefficient(sizes):
    spec = GridSpec(sizes)
    U = forward_transform(GridField(spec, np.ones(sizes))).coeffs
    assert U.flat[0] == pytest.approx(1.0, abs=1e-15)
    assert np.abs(U.ravel()[1:]).max() < 1e-15


def test_single_mode_coefficients():
    spec = GridSpec((64,), (3.0,))
    u = GridField.from_function(spec, lambda x: np.cos(TWO_PI * x / 3.0))
    U = forward_transform(u).coeffs
    assert U[1] == pytest.approx(0.5, abs=1e-14)
    assert U[-1] == pytest.approx(0.5, abs=1e-14)
    rest = np.delete(U, [1, 63])
    assert np.abs(rest).max() < 1e-14


def test_roundtrip_random_1024(rng):
    spec = GridSpec((1024,))
    a = rng.standard_normal(1024) + 1j * rng.standard_normal(1024)
    u = GridField(spec, a)
    back = inverse_transform(forward_transform(u)).samples
    assert np.abs(back - a).max() / np.abs(a).max() <= 1e-12


@given(st.sampled_from([(8,), (16,), (8, 16), (16, 8, 8)]), st.integers(0, 2 ** 31))
def test_roundtrip_property(sizes, seed):
    a = np.random.default_rng(seed).standard_normal(sizes)
    u = GridField(GridSpec(sizes), a)
    back = inverse_transform(forward_transform(u)).samples
    assert np.abs(back - a).max() <= 1e-12 * max(1.0, np.abs(a).max())


def test_apply_multiplier_identity(rng):
    spec = GridSpec((16, 16))
    u = GridField(spec, rng.standard_normal((16, 16)))
    assert np.allclose(apply_multiplier(u, np.ones((16, 16))).samples, u.samples, atol=1e-14)


# --- quadrature norms -----------------------------------------------------

@pytest.mark.parametrize("p", [1 / 3, 0.5, 1.0, 2.0, 3.5, np.inf])
def test_lp_norm_constant_on_unit_torus(p):
    spec = GridSpec((16, 16), (1.0, 1.0))
    assert lp_norm(GridField(spec, np.ones((16, 16))), p) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("p", [0.0, -1.0])
def test_lp_norm_rejects_nonpositive_p(p):
    with pytest.raises(ValidationError):
        lp_norm(GridField(GridSpec((8,)), np.ones(8)), p)


def test_scaled_bump_ratio_quarter():
    # k^n eta(k x) at n = 2, p = 1/2: ||.||_p ratio 2^(n(1 - 1/p)) = 1/4 for k = 2
    spec = GridSpec.cube(512, 2, TWO_PI)
    prof = Profiles.for_period(TWO_PI)
    r = lp_norm(scaled_delta_family(prof, 2, spec), 0.5) / lp_norm(
        scaled_delta_family(prof, 1, spec), 0.5)
    assert r == pytest.approx(0.25, rel=0.02)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
def test_gaussian_norm_against_fine_grid_and_closed_form(p):
    L, sigma = TWO_PI, TWO_PI / 20

    def norm_on(n):
        spec = GridSpec.cube(n, 2, L)
        u = GridField.from_function(
            spec, lambda x, y: np.exp(-(x * x + y * y) / (2 * sigma ** 2)), centered=True)
        return lp_norm(u, p)

    coarse, fine = norm_on(256), norm_on(2048)
    assert abs(coarse - fine) / fine <= 1e-3
    exact = (TWO_PI * sigma ** 2 / p) ** (1 / p)
    assert fine == pytest.approx(exact, rel=1e-6)


@given(st.floats(0.2, 4.0), st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3),
       st.integers(0, 1000))
def test_lp_norm_homogeneous_and_shift_invariant(p, c, seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec((16, 8))
    u = GridField(spec, rng.standard_normal((16, 8)))
    assert lp_norm(c * u, p) == pytest.approx(abs(c) * lp_norm(u, p), rel=1e-12)
    moved = translate_by_grid_shift(u, [3, -2])
    assert lp_norm(moved, p) == pytest.approx(lp_norm(u, p), rel=1e-12)


def test_pairing_is_bilinear_quadrature():
    spec = GridSpec((32,), (2.0,))
    u = GridField.from_function(spec, lambda x: np.sin(np.pi * x))
    assert pairing(u, u).real == pytest.approx(1.0, rel=1e-13)   # int_0^2 sin^2(pi x) dx


# --- geometry -------------------------------------------------------------

def test_restriction_of_xn_constant_field():
    spec = GridSpec((32, 16), (3.0, 5.0))
    u = GridField.from_function(spec, lambda x, y: np.cos(TWO_PI * x / 3.0) + 0 * y)
    tr = restrict_hyperplane(u)
    assert tr.spec == GridSpec((32,), (3.0,))
    assert np.allclose(tr.samples, np.cos(TWO_PI * spec.coords(0) / 3.0), atol=1e-15)


def test_restriction_of_delta_off_plane_is_zero():
    spec = GridSpec((16, 16))
    a = np.zeros((16, 16))
    a[0, 0] = 1.0
    u = GridField(spec, a)
    assert not restrict_hyperplane(u, -1, 3).samples.any()
    assert restrict_hyperplane(u, -1, 0).samples[0] == 1.0


@pytest.mark.parametrize("axis, index", [(2, 0), (-3, 0), (1, 16), (1, -1)])
def test_restriction_bad_arguments(axis, index):
    u = GridField(GridSpec((16, 16)), np.zeros((16, 16)))
    with pytest.raises(ValidationError):
        restrict_hyperplane(u, axis, index)


def test_restriction_of_block_stays_in_projected_ball(rng):
    spec = GridSpec.cube(128, 2)
    P = build_radial_partition(spec)
    u = random_bandlimited(spec, rng, 0.9 * spec.nyquist(0))
    h = spec.drop_axis(-1)
    for j, b in iter_blocks(u, P):
        if j == P.J_max:
            continue
        c = np.abs(np.fft.fft(restrict_hyperplane(b).samples)) / h.npoints
        outside = np.abs(h.frequencies(0)) > 1.3 * 2 ** j * (1 + 1e-12)
        assert c[outside].max(initial=0) <= 1e-12 * c.max()


def test_tensor_with_delta_normalization():
    target = GridSpec((256, 256), (1.0, 1.0))
    d = tensor_with_delta(GridField(target.drop_axis(-1), np.ones(256)), target)
    assert np.all(d.samples[:, 0] == 256.0)
    assert not d.samples[:, 1:].any()
    assert pairing(d, GridField(target, np.ones((256, 256)))).real == pytest.approx(1.0)


def test_tensor_with_delta_pairing_matches_hyperplane_quadrature(rng):
    spec = GridSpec((32, 64), (TWO_PI, 3.0))
    v = random_bandlimited(spec.drop_axis(-1), rng, 6.0)
    phi = random_bandlimited(spec, rng, 6.0)
    lhs = pairing(tensor_with_delta(v, spec), phi)
    h = spec.steps[0]
    rhs = np.sum(v.samples * phi.samples[:, 0]) * h        # independent hyperplane rule
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))
    zero = tensor_with_delta(GridField.zeros(spec.drop_axis(-1)), spec)
    assert not zero.samples.any()


def test_dilate_identity_and_mode_doubling():
    spec = GridSpec((64,))
    u = GridField.from_function(spec, lambda x: np.cos(3 * x))
    assert np.array_equal(dilate_integer(u, 1).samples, u.samples)
    U = np.abs(forward_transform(dilate_integer(u, 2)).coeffs)
    assert set(np.nonzero(U > 1e-12)[0]) == {6, 64 - 6}
    with pytest.raises(ValidationError):
        dilate_integer(u, 0)


def test_dilate_shrinks_compact_support():
    spec = GridSpec((1024,), (1.0,))
    d = 0.2
    u = GridField.from_function(spec, lambda x: np.where(np.abs(x) < d / 2, 1.0, 0.0),
                                centered=True)
    for k in (1, 2, 4):
        v = dilate_integer(u, k)
        # k periodic copies; measure the one around the origin
        near = np.abs(spec.coords(0, centered=True)) < 0.5 / k
        width = np.count_nonzero(v.samples[near]) * spec.steps[0]
        assert width == pytest.approx(d / k, abs=2 * spec.steps[0])
        assert np.count_nonzero(v.samples) == pytest.approx(k * np.count_nonzero(v.samples[near]))


# --- GFLD1 files ----------------------------------------------------------

@pytest.mark.parametrize("complex_", [False, True])
def test_gfld_roundtrip_bitwise(tmp_path, rng, complex_):
    spec = GridSpec((8, 16), (1.5, 2.5))
    a = rng.standard_normal((8, 16))
    if complex_:
        a = a + 1j * rng.standard_normal((8, 16))
    path = tmp_path / "f.gfld"
    write_gfld(path, GridField(spec, a))
    u = read_gfld(path)
    assert u.spec == spec
    assert u.samples.tobytes() == np.asarray(a).tobytes()


def _header(ndim=1, sizes=(8,), periods=(1.0,), code=0):
    return (b"GFLD1" + struct.pack("<B", ndim) + struct.pack(f"<{len(sizes)}I", *sizes)
            + struct.pack(f"<{len(periods)}d", *periods) + struct.pack("<B", code))


@pytest.mark.parametrize("blob", [
    b"",
    b"GFLD0" + b"\0" * 40,
    b"GFLD1\x01",
    _header(code=7) + b"\0" * 64,
    _header() + b"\0" * 63,
    _header(ndim=4, sizes=(8, 8, 8, 8), periods=(1.0,) * 4),
    _header(sizes=(12,)) + b"\0" * 96,
])
def test_gfld_malformed(tmp_path, blob):
    path = tmp_path / "bad.gfld"
    path.write_bytes(blob)
    with pytest.raises(ValidationError):
        read_gfld(path)
