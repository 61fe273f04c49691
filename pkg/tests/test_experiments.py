import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from besovlab import GridSpec, GuardViolation, ValidationError, _fft
from besovlab.experiments import (EXPERIMENTS, ExperimentReport, Verdict, fit_power_law,
                                  log2_slope, random_bandlimited, run_trials, stability,
                                  trial_rngs)
from besovlab.experiments.corpus import lattice
from besovlab.grid import forward_transform


# --- power-law fits -----------------------------------------------------------

def test_fit_exact_power_law():
    fit = fit_power_law([(1, 3), (2, 12), (4, 48)])
    assert fit.exponent == pytest.approx(2.0, abs=1e-14)
    assert fit.prefactor == pytest.approx(3.0, rel=1e-14)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.predict(8) == pytest.approx(192.0, rel=1e-13)


def test_fit_constant_samples():
    fit = fit_power_law([(1, 5.0), (3, 5.0), (9, 5.0)])
    assert fit.exponent == pytest.approx(0.0, abs=1e-15)
    assert fit.r2 == 1.0


@pytest.mark.parametrize("samples", [
    [(1, 1), (2, 2)],
    [(1, 1), (2, 0), (3, 3)],
    [(0, 1), (2, 2), (3, 3)],
    [(1, 1), (2, np.inf), (3, 3)],
    [(2, 1), (2, 2), (2, 3)],
])
def test_fit_rejects_bad_samples(samples):
    with pytest.raises(ValidationError):
        fit_power_law(samples)


@given(st.floats(-3, 3), st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10))
def test_fit_rescaling_invariance(alpha, c, a, b):
    xs = np.array([1.0, 2.0, 3.0, 5.0, 8.0])
    ys = c * xs ** alpha * np.array([1.0, 1.1, 0.95, 1.02, 0.99])
    f0 = fit_power_law(zip(xs, ys))
    f1 = fit_power_law(zip(a * xs, b * ys))
    assert f1.exponent == pytest.approx(f0.exponent, abs=1e-9)
    assert f1.prefactor == pytest.approx(f0.prefactor * b / a ** f0.exponent, rel=1e-9)


def test_log2_slope():
    assert log2_slope([0, 1, 2, 3], [1, 0.5, 0.25, 0.125]) == pytest.approx(-1.0)


# --- reports -------------------------------------------------------------------

def _report():
    rep = ExperimentReport("demo", {"b": 1, "a": (1, 2)})
    rep.trials = [{"k": 1, "value": 0.5}, {"k": 2, "value": 1 + 0j, "extra": np.float64(np.inf)}]
    rep.fits["law"] = fit_power_law([(1, 3), (2, 12), (4, 48)])
    rep.curves["curve"] = [(0, 1.0), (1, 0.5)]
    rep.verdicts = [Verdict("ok", True, 1.0, 0.1), Verdict("bad", False, 2.0, 0.1, "note")]
    return rep


def test_report_json_is_sorted_and_clean():
    rep = _report()
    text = rep.to_json()
    d = json.loads(text)
    assert list(d) == sorted(d)
    assert d["passed"] is False
    assert d["trials"][1]["extra"] == "inf"
    assert d["trials"][1]["value"] == 1.0
    assert d["config"]["a"] == [1, 2]
    assert d["fits"]["law"]["exponent"] == pytest.approx(2.0)
    assert text == _report().to_json()


def test_report_csv_crlf():
    text = _report().to_csv()
    lines = text.split("\r\n")
    assert lines[0] == "k,value,extra"
    assert lines[2] == "2,1.0,inf"
    assert "\n" not in text.replace("\r\n", "")


def test_report_gnuplot_and_lines():
    rep = _report()
    data = rep.gnuplot_data()
    assert set(data) == {"law", "curve"}
    assert data["curve"] == "0.0 1.0\n1.0 0.5\n"
    assert rep.verdict("bad").line() == "FAIL  bad: value=2.0 tolerance=0.1 note"
    assert rep.verdict("ok").line().startswith("PASS")
    assert rep.summary()["verdicts"] == {"ok": True, "bad": False}
    with pytest.raises(KeyError):
        rep.verdict("missing")


def test_stability():
    s = stability(1.0, 1.05, 0.1)
    assert s["rel_change"] == pytest.approx(0.05) and s["stable"]
    assert not stability(1.0, 1.2, 0.1)["stable"]


# --- corpus ----------------------------------------------------------------------

def test_trial_rngs_are_reproducible_and_independent():
    a = [r.standard_normal() for r in trial_rngs(7, 4)]
    b = [r.standard_normal() for r in trial_rngs(7, 4)]
    assert a == b
    assert len(set(a)) == 4


def test_lattice_and_guard():
    spec = GridSpec.cube(32, 2)
    m, r = lattice(spec, 3.0, 1.0)
    assert np.all((r >= 1.0) & (r <= 3.0))
    assert [tuple(x) for x in m] == sorted(tuple(x) for x in m)
    with pytest.raises(GuardViolation):
        lattice(spec, 16.0)


@pytest.mark.parametrize("real", [True, False])
def test_random_field_same_polynomial_on_refined_grid(real):
    # the draw depends on analytic frequencies only, so refinement adds zeros
    coarse = random_bandlimited(GridSpec.cube(32, 2), np.random.default_rng(3), 6.0, real=real)
    fine = random_bandlimited(GridSpec.cube(64, 2), np.random.default_rng(3), 6.0, real=real)
    assert np.isrealobj(coarse.samples) == real
    assert np.allclose(fine.samples[::2, ::2], coarse.samples, atol=1e-12)


def test_random_field_spectral_support():
    spec = GridSpec.cube(64, 2)
    u = random_bandlimited(spec, np.random.default_rng(0), 8.0, 3.0)
    C = forward_transform(u).coeffs
    wx, wy = np.meshgrid(spec.frequencies(0), spec.frequencies(1), indexing="ij")
    r = np.hypot(wx, wy)
    outside = (r > 8.0 + 1e-9) | (r < 3.0 - 1e-9)
    assert np.abs(C[outside]).max() <= 1e-12 * np.abs(C).max()


def test_run_trials_thread_independent():
    fn = lambda i, rng: (i, float(rng.standard_normal(3).sum()))
    assert run_trials(fn, 5, 8, threads=1) == run_trials(fn, 5, 8, threads=4)


# --- smoke runs ---------------------------------------------------------------------

def test_registry_names():
    assert set(EXPERIMENTS) == {"partition", "theta", "scaling", "nikolskii", "continuity",
                                "right_inverse", "consistency", "trace_bound", "sobolev", "ythm",
                                "omega", "nbord", "dual", "vk", "quasinorm"}


SMOKE = [
    ("quasinorm", dict(pairs=6, size=32)),
    ("theta", dict(size=32, trials=3)),
    ("continuity", dict(fields=3, size=32)),
    ("trace_bound", dict(sizes=(64, 128), trials=3, band=10.0)),
]


@pytest.mark.parametrize("name, kwargs", SMOKE, ids=[s[0] for s in SMOKE])
def test_smoke_reruns_bitwise(name, kwargs):
    a = EXPERIMENTS[name](**kwargs)
    b = EXPERIMENTS[name](**kwargs)
    assert isinstance(a, ExperimentReport)
    assert a.experiment == name
    assert a.verdicts
    assert a.to_json() == b.to_json()
    json.loads(a.to_json())


def test_smoke_thread_count_does_not_change_results():
    with _fft.threads(1):
        a = EXPERIMENTS["trace_bound"](sizes=(64, 128), trials=3, band=10.0).to_json()
    with _fft.threads(4):
        b = EXPERIMENTS["trace_bound"](sizes=(64, 128), trials=3, band=10.0).to_json()
    assert a == b
