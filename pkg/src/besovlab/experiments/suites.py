"""
Experiment suites. Each ``exp_*`` function runs a seeded corpus, records
per-trial measurements, fits and constants, and returns an
:class:`ExperimentReport` whose verdicts carry the tolerances used.
"""
from __future__ import annotations

import numpy as np

from .. import _fft
from ..besov import (BesovParams, besov_norm, besov_norm_theta, lq_combine, mixed_norm,
                     nikolskii_ratio, series_B, series_B_from_norms, parse_exponent)
from ..counterexamples import (E_omega_N_series, Profiles, T_on_vk, find_point_layout, kernel,
                               omega_N, omega_series_B, psi_k_family, psi_k_lateral,
                               scaled_delta_family, smooth_test_function, v_k_family, vk_budget)
from ..errors import ValidationError
from ..grid import (GridField, GridSpec, apply_multiplier, forward_transform, inverse_transform,
                    lp_norm, pairing, restrict_hyperplane)
from ..littlewood_paley import (CutoffProfile, build_radial_partition, build_tensor_partition,
                                iter_blocks)
from ..trace_ext import (annulus_violations, continuity_profile, default_extension_profile,
                         dual_estimate_ratio, dual_norm_B, extension_K, k_summand_parts,
                         k_summand_spectra, shell_trace_ratios, trace_gamma0)
from .corpus import (PacketFamily, power_envelope, random_bandlimited, random_block_series,
                     run_trials)
from .fitting import fit_power_law, log2_slope
from .report import ExperimentReport, Verdict, stability

TWO_PI = 2 * np.pi


def _grid_cfg(spec):
    return {"sizes": list(spec.sizes), "periods": list(spec.periods)}


def _max_rel(a, b):
    den = np.abs(b).max()
    return float(np.abs(a - b).max() / den) if den else float(np.abs(a - b).max())


# --------------------------------------------------------------------------
# partitions

def exp_partition(mask_size=1024, field_size=512, n=2, trials=100, seed=0):
    """Partition-of-unity sums and analyze/synthesize round trips."""
    ms = GridSpec.cube(mask_size, n)
    P = build_radial_partition(ms)
    T = build_tensor_partition(ms)
    radial = float(np.abs(sum(P.masks) - 1).max())
    tensor = float(np.abs(sum(T.mask(*k) for k in T.keys()) - 1).max())
    fs = GridSpec.cube(field_size, n)
    Pf = build_radial_partition(fs)
    nyq = min(fs.nyquist(i) for i in range(n))

    def trial(i, rng):
        u = random_bandlimited(fs, rng, 0.95 * nyq, real=bool(i % 2))
        total = None
        for _, b in iter_blocks(u, Pf):
            total = b.samples if total is None else total + b.samples
        return {"trial": i, "roundtrip_rel": _max_rel(total, u.samples)}

    rows = run_trials(trial, seed, trials)
    worst = max(r["roundtrip_rel"] for r in rows)
    rep = ExperimentReport("partition", {"mask_grid": _grid_cfg(ms), "field_grid": _grid_cfg(fs),
                                         "trials": trials, "seed": seed})
    rep.trials = rows
    rep.constants = {"radial_sum_dev": radial, "tensor_sum_dev": tensor, "roundtrip_rel": worst,
                     "J_max": P.J_max, "tensor_top": T.K}
    rep.verdicts = [Verdict("radial_sum", radial <= 1e-12, radial, 1e-12),
                    Verdict("tensor_sum", tensor <= 1e-12, tensor, 1e-12),
                    Verdict("roundtrip", worst <= 1e-12, worst, 1e-12)]
    return rep


def exp_theta(size=128, n=2, trials=50, s=1.0, p=1.0, q=1.0, seed=0, band=0.2):
    """Empirical equivalence constant between radial and tensor quasi-norms."""
    bp = BesovParams(s, p, q)
    out = {}
    for N in (size, 2 * size):
        spec = GridSpec.cube(N, n)
        P, T = build_radial_partition(spec), build_tensor_partition(spec)
        radius = band * size / 2

        def trial(i, rng):
            u = random_bandlimited(spec, rng, radius, envelope=power_envelope(1.5))
            return besov_norm_theta(u, bp, T) / besov_norm(u, bp, P)

        out[N] = run_trials(trial, seed, trials)
    lo, hi = out[size], out[2 * size]
    C = max(max(max(r, 1 / r) for r in lo), 1.0)
    C2 = max(max(max(r, 1 / r) for r in hi), 1.0)
    st = stability(C, C2, 0.20)
    rep = ExperimentReport("theta", {"sizes": [size, 2 * size], "n": n, "params": bp.as_dict(),
                                     "trials": trials, "seed": seed})
    rep.trials = [{"trial": i, "ratio_coarse": a, "ratio_fine": b} for i, (a, b) in enumerate(zip(lo, hi))]
    rep.constants = {"C": C, "C_fine": C2}
    rep.stability = {"C": st}
    rep.verdicts = [Verdict("theta_equivalence_stable", st["stable"], st["rel_change"], 0.20)]
    return rep


# --------------------------------------------------------------------------
# dilation families

def exp_scaling(p_values=("1/3", "1/2", "2/3"), ks=tuple(range(1, 9)), n=2, size=1024,
                period=TWO_PI, tol=0.05):
    """Scaling of ``k**n eta(k x)`` in ``L_p`` and of the ``psi_k`` family."""
    spec = GridSpec.cube(size, n, period)
    prof = Profiles.for_period(period)
    test = smooth_test_function(spec)
    fields = {k: scaled_delta_family(prof, k, spec) for k in ks}
    rep = ExperimentReport("scaling", {"grid": _grid_cfg(spec), "p": list(p_values), "k": list(ks)})
    pair_err = [abs(pairing(fields[k], test) - 1.0) for k in ks]
    for ps in p_values:
        p = parse_exponent(ps)
        norms = [lp_norm(fields[k], p) for k in ks]
        fit = fit_power_law(zip(ks, norms))
        target = n * (1 - 1 / p)
        rep.fits[f"delta_p={ps}"] = fit
        rep.verdicts.append(Verdict(f"delta_exponent_p={ps}", abs(fit.exponent - target) <= tol,
                                    fit.exponent, f"{target:g}±{tol}"))
        for k, v in zip(ks, norms):
            rep.trials.append({"family": "scaled_delta", "p": p, "k": k, "norm": v,
                               "ratio": v / norms[0], "pairing_error": pair_err[ks.index(k)]})
    rep.verdicts.append(Verdict("delta_pairing_decreasing", bool(np.all(np.diff(pair_err) < 0)),
                                pair_err[-1], "strictly decreasing"))
    # psi_k: the trace keeps a point mass, the T-side factor vanishes in L_p
    if n >= 2:
        hspec = spec.drop_axis(-1)
        htest = smooth_test_function(hspec)
        P = build_radial_partition(spec)
        trace_err = []
        lat = {}
        for k in ks:
            tr, _ = trace_gamma0(psi_k_family(prof, k, spec), P, keep_partials=False)
            trace_err.append(abs(pairing(tr, htest) - 1.0))
            lat[k] = psi_k_lateral(prof, k, hspec)
        rep.curves["psi_k_trace_pairing_error"] = list(zip(ks, trace_err))
        rep.verdicts.append(Verdict("psi_k_trace_pairing_decreasing",
                                    bool(np.all(np.diff(trace_err) < 0)), trace_err[-1],
                                    "strictly decreasing"))
        for ps in p_values:
            p = parse_exponent(ps)
            fit = fit_power_law((k, lp_norm(lat[k], p)) for k in ks)
            target = (n - 1) * (1 - 1 / p)
            rep.fits[f"psi_k_lateral_p={ps}"] = fit
            rep.verdicts.append(Verdict(f"psi_k_lateral_exponent_p={ps}",
                                        abs(fit.exponent - target) <= tol, fit.exponent,
                                        f"{target:g}±{tol}"))
    return rep


# --------------------------------------------------------------------------
# per-shell inequalities

NIKOLSKII_GRID = ((16, 65536), (TWO_PI * 8, TWO_PI * 64))


def exp_nikolskii(p_values=("1/2", "1", "2"), blocks=50, shells=tuple(range(9)), seed=0,
                  sizes=NIKOLSKII_GRID[0], periods=NIKOLSKII_GRID[1], tol=0.05):
    """Uniformity in the shell index of three per-shell constants.

    For every packet family and shell the Nikolskii ratio, the restriction
    ratio and the mixed-norm ratio are measured; the worst case over the
    corpus is regressed against ``j`` in ``log2`` scale.
    """
    spec = GridSpec(sizes, periods)
    ps = [parse_exponent(p) for p in p_values]
    hspec = spec.drop_axis(-1)

    def trial(i, rng):
        fam = PacketFamily.draw(rng, hspec)
        rows = []
        for j in shells:
            blk = fam.block(spec, j)
            for p in ps:
                r = shell_trace_ratios(blk, j, p)
                rows.append({"family": i, "j": j, "p": p, "nikolskii": nikolskii_ratio(blk, j, p),
                             "trace_ratio": r["trace_ratio"], "mixed_ratio": r["mixed_ratio"]})
        return rows

    rows = [r for chunk in run_trials(trial, seed, blocks) for r in chunk]
    rep = ExperimentReport("nikolskii", {"grid": _grid_cfg(spec), "p": list(p_values),
                                         "families": blocks, "shells": list(shells), "seed": seed})
    rep.trials = rows
    for pstr, p in zip(p_values, ps):
        for key in ("nikolskii", "trace_ratio", "mixed_ratio"):
            worst = [max(r[key] for r in rows if r["p"] == p and r["j"] == j) for j in shells]
            slope = log2_slope(shells, worst)
            rep.curves[f"{key}_p={pstr}"] = list(zip(shells, worst))
            rep.constants[f"{key}_max_p={pstr}"] = max(worst)
            rep.verdicts.append(Verdict(f"{key}_slope_p={pstr}", abs(slope) <= tol, slope, tol))
    return rep


def exp_continuity(p_values=("1/2", "1", "2"), fields=100, size=128, n=2, seed=0):
    """Slice-norm profile against the shell-sum bound on random fields."""
    spec = GridSpec.cube(size, n)
    P = build_radial_partition(spec)
    nyq = min(spec.nyquist(i) for i in range(n))
    ps = [parse_exponent(p) for p in p_values]

    def trial(i, rng):
        u = random_bandlimited(spec, rng, 0.9 * nyq, envelope=power_envelope(1.0 + rng.uniform(0, 2)))
        out = []
        for p in ps:
            prof = continuity_profile(u, P, p)
            tr, _ = trace_gamma0(u, P, keep_partials=False)
            c = max(m / (2.0 ** (j / p) * l) for j, (m, l) in enumerate(zip(prof.shell_mixed, prof.shell_lp))
                    if l > 0)
            out.append({"trial": i, "p": p, "max_profile": float(prof.plane_norms.max()),
                        "bound": prof.bound, "profile_at_0": float(prof.plane_norms[0]),
                        "trace_norm": lp_norm(tr, p), "modulus": prof.modulus, "shell_constant": c})
        return out

    rows = [r for chunk in run_trials(trial, seed, fields) for r in chunk]
    rep = ExperimentReport("continuity", {"grid": _grid_cfg(spec), "p": list(p_values),
                                          "fields": fields, "seed": seed})
    rep.trials = rows
    worst = max(r["max_profile"] / r["bound"] for r in rows)
    at0 = max(abs(r["profile_at_0"] - r["trace_norm"]) / r["trace_norm"] for r in rows)
    rep.constants = {"max_profile_over_bound": worst, "profile_at_0_vs_trace": at0}
    for pstr, p in zip(p_values, ps):
        rep.constants[f"shell_constant_p={pstr}"] = max(r["shell_constant"] for r in rows if r["p"] == p)
    rep.verdicts = [Verdict("profile_bounded", worst <= 1.0, worst, "<= 1"),
                    Verdict("profile_at_zero_is_trace", at0 <= 1e-12, at0, 1e-12)]
    return rep


# --------------------------------------------------------------------------
# trace and extension

def exp_right_inverse(count=50, size=1024, n=2, seed=0, scan_full=5, besov_trials=10,
                      params=(1.0, 1.0, 1.0)):
    """Right-inverse identity of the extension and the summand annuli."""
    spec = GridSpec.cube(size, n)
    P = build_radial_partition(spec)
    Pp = P.hyperplane()
    hspec = Pp.spec
    psi = default_extension_profile()
    psi.verify()
    radius = 0.99 * P.profile.inner * 2.0 ** (P.J_max - 3)   # keeps shells <= J_max - 2
    realized = np.sqrt(P.profile.outer ** 2 + 1)
    s, p, q = params
    bp_src, bp_ext = BesovParams(s - 1 / p, p, q), BesovParams(s, p, q)
    xi_h = [np.abs(hspec.frequencies(i)) for i in range(hspec.ndim)]
    xi_n = np.abs(spec.frequencies(spec.ndim - 1))

    def separable_scan(j, vj, cj):
        # min/max radius over the product support, evaluated exactly
        if hspec.ndim == 1:
            rh = xi_h[0][vj != 0]
        else:
            rh = hspec.frequency_radius()[vj != 0]
        rn = xi_n[cj != 0]
        lo = np.sqrt(rh.min() ** 2 + rn.min() ** 2)
        hi = np.sqrt(rh.max() ** 2 + rn.max() ** 2)
        top = 3.0 if j == P.J_max else realized
        return hi <= top * 2.0 ** j * (1 + 1e-12) and (j == 0 or lo >= 2.0 ** j / 3)

    def trial(i, rng):
        v = random_bandlimited(hspec, rng, radius, envelope=power_envelope(1.0))
        Kv = extension_K(v, P, psi)
        tr, _ = trace_gamma0(Kv, P, keep_partials=False)
        err = lp_norm(tr - v, 2) / lp_norm(v, 2)
        ann_ok = all(separable_scan(j, vj, cj) for j, vj, cj in k_summand_parts(v, P, psi))
        full = None
        if i < scan_full:
            full = sum(annulus_violations(c, spec, j, A=3.0) +
                       (annulus_violations(c, spec, j, upper=realized) if j < P.J_max else 0)
                       for j, c in k_summand_spectra(v, P, psi))
        ratio = None
        if i < besov_trials:
            ratio = besov_norm(Kv, bp_ext, P) / besov_norm(v, bp_src, Pp)
        return {"trial": i, "trace_rel_error": err, "annulus_ok": ann_ok,
                "full_scan_violations": full, "besov_ratio": ratio}

    rows = run_trials(trial, seed, count)
    worst = max(r["trace_rel_error"] for r in rows)
    ann = all(r["annulus_ok"] for r in rows)
    full = sum(r["full_scan_violations"] or 0 for r in rows)
    rep = ExperimentReport("right_inverse", {"grid": _grid_cfg(spec), "count": count, "seed": seed,
                                             "band_radius": radius, "params": bp_ext.as_dict()})
    rep.trials = rows
    rep.constants = {"trace_rel_error": worst, "besov_constant": max(r["besov_ratio"] for r in rows
                                             if r["besov_ratio"] is not None)}
    rep.verdicts = [Verdict("right_inverse", worst <= 1e-8, worst, 1e-8),
                    Verdict("annulus_scan", ann and full == 0, full, 0)]
    return rep


def _cutoff_variants():
    return CutoffProfile(kind="exp"), CutoffProfile(kind="exp2")


def exp_consistency(count=10, size=1024, n=2, seed=0):
    """Block-sum trace versus pointwise restriction, and independence of the
    trace from the choice of admissible cutoff."""
    spec = GridSpec.cube(size, n)
    a, b = _cutoff_variants()
    Pa, Pb = build_radial_partition(spec, a), build_radial_partition(spec, b)
    radius = 0.99 * Pa.profile.inner * 2.0 ** (Pa.J_max - 2)

    def trial(i, rng):
        u = random_bandlimited(spec, rng, radius, envelope=power_envelope(1.0), real=bool(i % 2))
        ta, _ = trace_gamma0(u, Pa, keep_partials=False)
        tb, _ = trace_gamma0(u, Pb, keep_partials=False)
        pw = restrict_hyperplane(u)
        return {"trial": i, "vs_restriction": _max_rel(ta.samples, pw.samples),
                "cutoff_independence": _max_rel(ta.samples, tb.samples)}

    rows = run_trials(trial, seed, count)
    rep = ExperimentReport("consistency", {"grid": _grid_cfg(spec), "count": count, "seed": seed,
                                           "band_radius": radius, "cutoffs": ["exp", "exp2"]})
    rep.trials = rows
    r1 = max(r["vs_restriction"] for r in rows)
    r2 = max(r["cutoff_independence"] for r in rows)
    rep.constants = {"vs_restriction": r1, "cutoff_independence": r2}
    rep.verdicts = [Verdict("trace_equals_restriction", r1 <= 1e-10, r1, 1e-10),
                    Verdict("cutoff_independence", r2 <= 1e-10, r2, 1e-10)]
    return rep


def _ratio_corpus(name, sizes, n, trials, seed, band, measure, band_tol=0.10, config=None):
    """Run ``measure(u, ctx)`` on the same seeded corpus at two resolutions."""
    per = {}
    for N in sizes:
        spec = GridSpec.cube(N, n)
        ctx = {"spec": spec, "P": build_radial_partition(spec)}

        def trial(i, rng):
            u = random_bandlimited(spec, rng, band, envelope=power_envelope(1.0 + (i % 5) * 0.5))
            return measure(u, ctx)

        per[N] = run_trials(trial, seed, trials)
    lo, hi = sizes
    c_lo, c_hi = max(per[lo]), max(per[hi])
    st = stability(c_lo, c_hi, band_tol)
    rep = ExperimentReport(name, dict(config or {}, sizes=list(sizes), n=n, trials=trials,
                                      seed=seed, band_radius=band))
    rep.trials = [{"trial": i, "ratio_coarse": a, "ratio_fine": b}
                  for i, (a, b) in enumerate(zip(per[lo], per[hi]))]
    rep.constants = {"max_ratio": c_lo, "max_ratio_fine": c_hi}
    rep.stability = {"max_ratio": st}
    bounded = bool(np.isfinite(c_lo) and np.isfinite(c_hi))
    rep.verdicts = [Verdict("ratio_bounded", bounded, c_hi, "finite"),
                    Verdict("ratio_stable", st["stable"], st["rel_change"], band_tol)]
    return rep


def exp_trace_bound(p=1, q=1, sizes=(256, 512), n=2, trials=50, seed=0, band=40.0):
    """``||trace u||_{L_p} / ||u||_{B^{1/p}_{p,q}}`` on a random corpus."""
    p, q = parse_exponent(p), parse_exponent(q)
    bp = BesovParams(1 / p, p, q)

    def measure(u, ctx):
        tr, _ = trace_gamma0(u, ctx["P"], keep_partials=False)
        return lp_norm(tr, p) / besov_norm(u, bp, ctx["P"])

    return _ratio_corpus("trace_bound", sizes, n, trials, seed, band, measure,
                         config={"p": p, "q": q})


def exp_sobolev(p="1/2", q=1, sizes=(256, 512), n=2, trials=50, seed=0, band=40.0):
    """Embedding ratio between the two borderline trace-source spaces."""
    p, q = parse_exponent(p), parse_exponent(q)
    src = BesovParams(n / p - n + 1, p, q)
    dst = BesovParams(n / q - n + 1, q, q)

    def measure(u, ctx):
        return besov_norm(u, dst, ctx["P"]) / besov_norm(u, src, ctx["P"])

    return _ratio_corpus("sobolev", sizes, n, trials, seed, band, measure,
                         config={"p": p, "q": q})


# --------------------------------------------------------------------------
# series with spectral conditions

def ythm_case(s, p, q, n):
    """Name the hypothesis region a parameter point falls in."""
    if s > max(0.0, n / p - n):
        return "ii"
    if abs(s - (n / p - n)) < 1e-12 and 0 < p < 1 and 0 < q <= 1:
        return "iii"
    raise ValidationError(f"(s, p, q) = ({s}, {p}, {q}) outside the covered cases")


YTHM_POINTS = ((0.5, 1, 2), (1, 1, 2), (3, 1, 2), (2, "1/2", "1/2"), (2, "1/2", 1))


def exp_ythm(points=YTHM_POINTS, sizes=(512, 1024), n=2, trials=50, J=5, A=1.0, seed=0,
             band_tol=0.10):
    """Series ``sum u_j`` with ball spectral condition against the series constant.

    ``points`` lists ``(s, p, q)``. In the supercritical region the target is
    the Besov norm with the same parameters. On the critical line
    ``s = n/p - n`` with ``p < 1``, ``q <= 1`` the targets are ``L_1`` and,
    depending on the order of ``p`` and ``q``, ``B^{n/p-n}_{p,inf}`` or
    ``B^{n/q-n}_{q,inf}``. Points sharing ``p`` share one corpus.
    """
    pts = [tuple(parse_exponent(x) for x in pt) for pt in points]
    cases = [ythm_case(s, p, q, n) for s, p, q in pts]
    ps = sorted({p for _, p, _ in pts})
    per = {}
    for N in sizes:
        spec = GridSpec.cube(N, n)
        P = build_radial_partition(spec)

        def trial(i, rng):
            out = {}
            for p in ps:
                _, shapes, w = random_block_series(spec, rng, J, 0.0, p, A)
                for (s, pp, q), case in zip(pts, cases):
                    if pp != p:
                        continue
                    tag = f"s={s:g},p={p:g},q={q:g}"
                    coef = w * 2.0 ** (-s * np.arange(J + 1))
                    total = shapes[0] * float(coef[0])
                    for c, b in zip(coef[1:], shapes[1:]):
                        total = total + float(c) * b
                    B = series_B_from_norms(coef, BesovParams(s, p, q))
                    if case == "ii":
                        out[tag] = besov_norm(total, BesovParams(s, p, q), P) / B
                    else:
                        tgt = (BesovParams(n / p - n, p, "inf") if q <= p
                               else BesovParams(n / q - n, q, "inf"))
                        out[tag] = besov_norm(total, tgt, P) / B
                        out[tag + ",L1"] = lp_norm(total, 1) / B
            return out

        per[N] = run_trials(trial, seed, trials)
    lo, hi = sizes
    rep = ExperimentReport("ythm", {"sizes": list(sizes), "n": n, "points": [list(p) for p in pts],
                                    "cases": cases, "trials": trials, "J": J, "A": A, "seed": seed})
    for i, (a, b) in enumerate(zip(per[lo], per[hi])):
        row = {"trial": i}
        row.update({f"{k}|coarse": v for k, v in a.items()})
        row.update({f"{k}|fine": v for k, v in b.items()})
        rep.trials.append(row)
    for key in per[lo][0]:
        c_lo = max(t[key] for t in per[lo])
        c_hi = max(t[key] for t in per[hi])
        st = stability(c_lo, c_hi, band_tol)
        rep.constants[key] = c_hi
        rep.stability[key] = st
        rep.verdicts.append(Verdict(f"bounded[{key}]", bool(np.isfinite(c_hi)), c_hi, "finite"))
        rep.verdicts.append(Verdict(f"stable[{key}]", st["stable"], st["rel_change"], band_tol))
    return rep


# --------------------------------------------------------------------------
# borderline families

OMEGA_GRID = ((1 << 18,), (TWO_PI * 64,))
WINDOW_GRID = ((1 << 16,), (TWO_PI * 64,))


def _omega_norms(r_values, Ns, sizes=OMEGA_GRID[0], periods=OMEGA_GRID[1]):
    spec = GridSpec(sizes, periods)
    P = build_radial_partition(spec)
    out = {}
    for N in Ns:
        lay = find_point_layout(P, N)
        om = omega_N(P, lay)
        out[N] = {"layout": lay, "field": om,
                  "norms": {r: besov_norm(om, BesovParams((spec.ndim) * (1 / r - 1), r, "inf"), P)
                            for r in r_values}}
    return spec, P, out


def exp_omega(r_values=("1/2", "1"), Ns=tuple(range(2, 9)), p="1/2", q_values=("1/2", "1", "2"),
              tol=0.1, sizes=OMEGA_GRID[0], periods=OMEGA_GRID[1]):
    """Growth of ``omega_N`` in ``B^t_{r,inf}`` against its series constant.

    The layout follows the kernel scan of ``Phi_0``; the fit over ``N``
    checks the lower-bound exponent ``1/r``.
    """
    rs = [parse_exponent(r) for r in r_values]
    p = parse_exponent(p)
    spec, P, data = _omega_norms(rs, Ns, sizes, periods)
    rep = ExperimentReport("omega", {"grid": _grid_cfg(spec), "r": list(r_values), "N": list(Ns),
                                     "p": p, "q": list(q_values)})
    for N in Ns:
        lay = data[N]["layout"]
        rep.trials.append({"N": N, "R": lay.R, "delta": lay.delta,
                           **{f"norm_r={rs_}": data[N]["norms"][r] for rs_, r in zip(r_values, rs)}})
    for rs_, r in zip(r_values, rs):
        fit = fit_power_law((N, data[N]["norms"][r]) for N in Ns)
        rep.fits[f"omega_r={rs_}"] = fit
        rep.verdicts.append(Verdict(f"omega_growth_r={rs_}", fit.exponent >= 1 / r - tol,
                                    fit.exponent, f">= {1 / r - tol:g}"))
    # series constant of the realized terms against the exact N**(1/q) law; the
    # continuum scaling of the term norms is kept as a reference fit
    k0 = lp_norm(kernel(P.psi(0), spec), p)
    for qs in q_values:
        q = parse_exponent(qs)
        realized = fit_power_law((N, omega_series_B(P, data[N]["layout"], p, q)) for N in Ns)
        rep.fits[f"B_scaling_law_q={qs}"] = fit_power_law((N, N ** (1 / q) * k0) for N in Ns)
        rep.fits[f"B_q={qs}"] = realized
        rep.verdicts.append(Verdict(f"B_exponent_q={qs}", abs(realized.exponent - 1 / q) <= 1e-12,
                                    realized.exponent, f"{1 / q:g} exact (1e-12)"))
    # ... and the separation property on each ball around a center
    sep = True
    k0f = kernel(P.mask(0), spec).samples.real
    rad = np.abs(spec.coords(0, centered=True))
    for N in Ns:
        lay = data[N]["layout"]
        conv = apply_multiplier(data[N]["field"], P.mask(0)).samples.real
        ball = rad < lay.delta
        for m in lay.center_indices:
            sep &= bool(np.all(np.abs(np.roll(conv, -m)[ball]) >= k0f[ball] / 2))
    rep.verdicts.append(Verdict("separation", sep, sep, "|Phi0 * omega| >= Phi0(.-x_j)/2 on balls"))
    return rep


def exp_nbord(p="1/2", q="1", r=None, n=2, Ns=tuple(range(2, 9)), sizes=(256, 512), trials=50,
              seed=0, band=40.0, tol=0.15, direct_Ns=(1, 2, 3, 4)):
    """Borderline trace estimates for ``p < 1``.

    Boundedness: the trace of random fields against the source norm at
    ``s = n/p - n + 1``, with trace target ``B^{(n-1)(1/p-1)}_{p,inf}`` when
    ``q <= p`` and ``B^{(n-1)(1/q-1)}_{q,inf}`` when ``p < q``. Sharpness
    (``p < q`` only): the trace of ``E omega_N``, which is ``omega_N``,
    grows like ``N**(1/r)`` in ``B^t_{r,inf}`` with ``r < q`` while the
    series constant of ``E omega_N`` grows like ``N**(1/q)``.
    """
    p, q = parse_exponent(p), parse_exponent(q)
    if not (0 < p < 1 and 0 < q <= 1):
        raise ValidationError("borderline experiment needs 0 < p < 1 and 0 < q <= 1")
    src = BesovParams(n / p - n + 1, p, q)
    tgt = (BesovParams((n - 1) * (1 / p - 1), p, "inf") if q <= p
           else BesovParams((n - 1) * (1 / q - 1), q, "inf"))

    def measure(u, ctx):
        tr, _ = trace_gamma0(u, ctx["P"], keep_partials=False)
        return besov_norm(tr, tgt, ctx["P"].hyperplane()) / besov_norm(u, src, ctx["P"])

    rep = _ratio_corpus("nbord", sizes, n, trials, seed, band, measure,
                        config={"p": p, "q": q, "source": src.as_dict(), "target": tgt.as_dict()})
    if p >= q:
        return rep
    r = p if r is None else parse_exponent(r)
    if not r < q:
        raise ValidationError("sharpness needs r < q")
    t = (n - 1) * (1 / r - 1)
    hspec = GridSpec(OMEGA_GRID[0], OMEGA_GRID[1])
    nspec = GridSpec(WINDOW_GRID[0], WINDOW_GRID[1])
    Ph = build_radial_partition(hspec)
    prof = Profiles.for_period(TWO_PI)
    rows = []
    for N in Ns:
        lay = find_point_layout(Ph, N)
        series = E_omega_N_series(prof, Ph, lay, nspec)
        trace = series.trace()
        num = besov_norm(trace, BesovParams(t, r, "inf"), Ph)
        B = series_B_from_norms([0.0] + series.term_norms(p), src)
        rows.append({"N": N, "trace_norm": num, "series_B": B, "ratio": num / B})
    fit = fit_power_law((row["N"], row["ratio"]) for row in rows)
    fitB = fit_power_law((row["N"], row["series_B"]) for row in rows)
    rep.fits["sharpness_ratio"] = fit
    rep.fits["E_omega_series_B"] = fitB
    rep.curves["sharpness_trace_norm"] = [(row["N"], row["trace_norm"]) for row in rows]
    rep.constants["sharpness_r"] = r
    target = 1 / r - 1 / q - tol
    rep.verdicts.append(Verdict("sharpness_growth", fit.exponent >= target, fit.exponent,
                                f">= {target:g}"))
    rep.verdicts.append(Verdict("E_omega_B_exponent", abs(fitB.exponent - 1 / q) <= tol,
                                fitB.exponent, f"{1 / q:g}±{tol}"))
    # full-grid cross-check at small N: the Besov norm stays below c * B
    if direct_Ns:
        dh = GridSpec((1024,), (TWO_PI * 16,))
        dn = GridSpec((512,), (TWO_PI * 4,))
        Pd = build_radial_partition(dh)
        full_spec = GridSpec(dh.sizes + dn.sizes, dh.periods + dn.periods)
        Pf = build_radial_partition(full_spec)
        ratios = []
        for N in direct_Ns:
            series = E_omega_N_series(prof, Pd, find_point_layout(Pd, N), dn)
            B = series_B_from_norms([0.0] + series.term_norms(p), src)
            ratios.append(besov_norm(series.materialize(), src, Pf) / B)
        rep.curves["direct_norm_over_B"] = list(zip(direct_Ns, ratios))
        rep.constants["direct_norm_over_B_max"] = max(ratios)
        rep.verdicts.append(Verdict("direct_norm_bounded_by_B", bool(np.isfinite(max(ratios))),
                                    max(ratios), "finite"))
    return rep


# --------------------------------------------------------------------------
# dual estimate

def exp_dual(p=2, sizes=(512, 1024), trials=100, seed=0, band=40.0, band_tol=0.10, check=3):
    """``||u||_p / B(u (x) delta_0)``: bounded and stable under refinement."""
    p = parse_exponent(p)
    if not p > 1:
        raise ValidationError("dual estimate needs p > 1")
    per = {}
    fact_err = 0.0
    for N in sizes:
        spec = GridSpec.cube(N, 2)
        hspec = spec.drop_axis(-1)
        T = build_tensor_partition(spec)

        def trial(i, rng):
            u = random_bandlimited(hspec, rng, band, envelope=power_envelope(1.0 + (i % 5) * 0.5))
            return u, dual_estimate_ratio(u, p, T)

        res = run_trials(trial, seed, trials)
        per[N] = [r for _, r in res]
        if N == sizes[0]:
            for u, _ in res[:check]:
                a = dual_norm_B(u, p, T, method="direct")
                b = dual_norm_B(u, p, T, method="factorized")
                fact_err = max(fact_err, abs(a - b) / b)
    lo, hi = sizes
    c_lo, c_hi = max(per[lo]), max(per[hi])
    st = stability(c_lo, c_hi, band_tol)
    rep = ExperimentReport("dual", {"p": p, "sizes": list(sizes), "trials": trials, "seed": seed,
                                    "band_radius": band})
    rep.trials = [{"trial": i, "ratio_coarse": a, "ratio_fine": b}
                  for i, (a, b) in enumerate(zip(per[lo], per[hi]))]
    rep.constants = {"max_ratio": c_lo, "max_ratio_fine": c_hi, "factorization_rel_error": fact_err}
    rep.stability = {"max_ratio": st}
    rep.verdicts = [Verdict("ratio_bounded", bool(np.isfinite(c_hi)), c_hi, "finite"),
                    Verdict("ratio_stable", st["stable"], st["rel_change"], band_tol),
                    Verdict("factorization", fact_err <= 1e-10, fact_err, 1e-10)]
    return rep


# --------------------------------------------------------------------------
# v_k family

def exp_vk(sizes=(1024, 4096), period=TWO_PI * 8, p="1/2", q=2, n=2, slope=-1.0, slope_tol=0.3):
    """Norm decay of ``v_k`` at the borderline smoothness, its trace pairing,
    and the ``L_p`` decay of the T-side closed form."""
    p, q = parse_exponent(p), parse_exponent(q)
    bp = BesovParams(n / p - n + 1, p, q)
    prof = Profiles.for_period(period)
    rep = ExperimentReport("vk", {"sizes": list(sizes), "period": period, "p": p, "q": q, "n": n,
                                  "smoothness": bp.s})
    for N in sizes:
        spec = GridSpec.cube(N, n, period)
        P = build_radial_partition(spec)
        hspec = spec.drop_axis(-1)
        test = smooth_test_function(hspec)
        ks = list(range(1, vk_budget(spec, prof.band) + 1))
        # shells outer, k inner: each mask is built once per grid
        spectra = [_fft.rfftn(v_k_family(prof, k, spec).samples) for k in ks]
        shell = [[] for _ in ks]
        traces = [np.zeros(hspec.sizes) for _ in ks]
        kconst = []
        for j in range(P.J_max + 1):
            m = P.mask(j, half=True)
            # scale-free L_p size of the shell kernel; flat in j on a large enough torus
            ker = _fft.irfftn(m.astype(float), spec.sizes) * spec.npoints / spec.volume
            kconst.append(lp_norm(GridField(spec, ker), p) * 2.0 ** (-j * (n - n / p)))
            del ker
            for i, U in enumerate(spectra):
                b = _fft.irfftn(U * m, spec.sizes)
                shell[i].append(lp_norm(GridField(spec, b), p))
                traces[i] += b[..., 0]
            del m
        del spectra
        norms = [series_B_from_norms(sh, bp) for sh in shell]
        perr = [abs(pairing(GridField(hspec, tr), test) - 1.0) for tr in traces]
        tnorm = [lp_norm(T_on_vk(prof, k, hspec), p) for k in ks]
        for k, a, b, c in zip(ks, norms, perr, tnorm):
            rep.trials.append({"N": N, "k": k, "besov_norm": a, "pairing_error": b, "T_norm": c})
        tag = f"N={N}"
        rep.curves[f"besov_norm_{tag}"] = list(zip(ks, norms))
        rep.curves[f"pairing_error_{tag}"] = list(zip(ks, perr))
        rep.curves[f"shell_kernel_constant_{tag}"] = list(enumerate(kconst))
        rep.verdicts.append(Verdict(f"besov_decreasing_{tag}", bool(np.all(np.diff(norms) < 0)),
                                    norms, "strictly decreasing"))
        rep.verdicts.append(Verdict(f"pairing_error_decreasing_{tag}",
                                    bool(np.all(np.diff(perr) < 0)), perr, "strictly decreasing"))
        fit = fit_power_law(zip(ks, tnorm))
        rep.fits[f"T_norm_{tag}"] = fit
        rep.verdicts.append(Verdict(f"T_slope_{tag}", abs(fit.exponent - slope) <= slope_tol,
                                    fit.exponent, f"{slope:g}±{slope_tol}"))
    return rep


# --------------------------------------------------------------------------
# quasi-norm axioms

def _normals(spec):
    P = build_radial_partition(spec)
    T = build_tensor_partition(spec)
    out = {}
    for p in (1 / 3, 0.5, 1.0, 2.0, np.inf):
        out[f"lp_{p:.3g}"] = (lambda u, p=p: lp_norm(u, p), min(1.0, p))
    for s, p, q in ((1.0, 0.5, 1.0), (0.5, 2.0, 0.5), (2.0, 1.0, np.inf), (-1.0, 1 / 3, 2.0)):
        bp = BesovParams(s, p, q)
        out[f"besov_{s:g}_{p:.3g}_{q:g}"] = (lambda u, bp=bp: besov_norm(u, bp, P), bp.lam)
        out[f"theta_{s:g}_{p:.3g}_{q:g}"] = (lambda u, bp=bp: besov_norm_theta(u, bp, T), bp.lam)
    if spec.ndim >= 2:
        for p in (0.5, 1.0, 2.0):
            out[f"mixed_{p:g}"] = (lambda u, p=p: mixed_norm(u, p), min(1.0, p))
        Th = build_tensor_partition(spec)
        hyper = spec.drop_axis(-1)
        out["dual_B_2"] = (lambda u: dual_norm_B(restrict_hyperplane(u), 2.0, Th), 1.0)
    return out


def exp_quasinorm(pairs=200, size=32, n=2, seed=0, hom_tol=1e-12):
    """lambda-subadditivity and homogeneity of every quasi-norm in the package."""
    spec = GridSpec.cube(size, n)
    norms = _normals(spec)
    nyq = spec.nyquist(0)

    def trial(i, rng):
        u = random_bandlimited(spec, rng, 0.9 * nyq, real=bool(i % 2))
        v = random_bandlimited(spec, rng, 0.9 * nyq, real=bool(i % 2)) * float(rng.uniform(0.1, 10))
        c = complex(rng.standard_normal(), rng.standard_normal()) if i % 2 == 0 else float(rng.standard_normal())
        out = {"trial": i}
        for name, (f, lam) in norms.items():
            a, b, s = f(u), f(v), f(u + v)
            out[f"{name}_sub"] = (s ** lam) / (a ** lam + b ** lam)
            out[f"{name}_hom"] = abs(f(c * u) - abs(c) * a) / (abs(c) * a)
        return out

    rows = run_trials(trial, seed, pairs)
    rep = ExperimentReport("quasinorm", {"grid": _grid_cfg(spec), "pairs": pairs, "seed": seed})
    rep.trials = rows
    for name in norms:
        sub = max(r[f"{name}_sub"] for r in rows)
        hom = max(r[f"{name}_hom"] for r in rows)
        rep.constants[f"{name}_sub_max"] = sub
        rep.constants[f"{name}_hom_max"] = hom
        rep.verdicts.append(Verdict(f"subadditive_{name}", sub <= 1 + 1e-12, sub, "<= 1"))
        rep.verdicts.append(Verdict(f"homogeneous_{name}", hom <= hom_tol, hom, hom_tol))
    return rep
