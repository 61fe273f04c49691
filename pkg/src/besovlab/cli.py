"""Command-line entry point: ``besovlab <command> ...``.

Every command prints one JSON line on stdout. Exit codes: 0 success,
2 invalid input, 3 a resolution or numerical guard refused the request.
"""
from __future__ import annotations

import argparse
import inspect
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import _fft
from .besov import (BesovParams, besov_norm, besov_norm_theta, mixed_norm, parse_exponent,
                    shell_norms)
from .counterexamples import (Profiles, find_point_layout, omega_N, omega_shell_budget,
                              psi_k_family, smooth_test_function, v_k_family)
from .errors import GuardViolation, ValidationError
from .experiments import EXPERIMENTS
from .experiments.corpus import random_bandlimited
from .experiments.report import _clean
from .grid import GridSpec, lp_norm, read_gfld, write_gfld
from .littlewood_paley import build_radial_partition, build_tensor_partition, iter_blocks
from .trace_ext import extension_K, trace_gamma0

FAMILIES = ("random", "smooth", "omega_N", "psi_k", "v_k")

# dest -> default, applied after the config file and the command line
DEFAULTS = {
    "out": "besovlab-out",
    "n": 2,
    "size": 256,
    "sizes": None,
    "period": 2 * np.pi,
    "periods": None,
    "s": 1.0,
    "p": 1.0,
    "q": 1.0,
    "seed": 0,
    "threads": None,
    "format": "all",
    "family": "random",
    "N": 1,
    "k": 1,
    "radius": None,
    "name": None,
    "norm_kind": "besov",
    "write_blocks": False,
    "target": None,
    "set": [],
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _common(sub):
    """Flags shared by every command. Defaults are None so unset flags do not
    shadow config-file values."""
    g = sub.add_argument_group("run configuration")
    g.add_argument("--config", help="JSON file whose keys mirror the long flag names")
    g.add_argument("--out", help="output directory")
    g.add_argument("--n", type=int, help="dimension of generated grids")
    g.add_argument("--size", type=int, help="points per axis")
    g.add_argument("--sizes", help="comma separated points per axis (overrides --size/--n)")
    g.add_argument("--period", type=float, help="period of every axis")
    g.add_argument("--periods", help="comma separated periods")
    g.add_argument("--s", help="smoothness")
    g.add_argument("--p", help="integrability (0.5, 1/3, inf accepted)")
    g.add_argument("--q", help="summability (0.5, 1/3, inf accepted)")
    g.add_argument("--seed", type=int)
    g.add_argument("--threads", type=int, help="worker cap (default from BESOVLAB_THREADS)")
    g.add_argument("--format", choices=("json", "csv", "all"), help="report files to write")


def build_parser():
    ap = _Parser(prog="besovlab", description=__doc__.splitlines()[0])
    cmds = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    field = cmds.add_parser("field", help="generate or inspect GFLD1 fields")
    fsub = field.add_subparsers(dest="action", required=True, parser_class=_Parser)
    gen = fsub.add_parser("gen", help="generate a field")
    _common(gen)
    gen.add_argument("--family", choices=FAMILIES)
    gen.add_argument("--N", type=int, help="number of omega_N terms")
    gen.add_argument("--k", type=int, help="family index for psi_k and v_k")
    gen.add_argument("--radius", type=float, help="spectral radius for random fields")
    gen.add_argument("--name", help="output file name inside --out")
    info = fsub.add_parser("info", help="describe a field file")
    _common(info)
    info.add_argument("--in", dest="input", required=True)

    norm = cmds.add_parser("norm", help="quasi-norm of a field")
    _common(norm)
    norm.add_argument("--in", dest="input", required=True)
    norm.add_argument("--kind", dest="norm_kind", choices=("besov", "theta", "lp", "mixed"))

    dec = cmds.add_parser("decompose", help="radial Littlewood-Paley shells of a field")
    _common(dec)
    dec.add_argument("--in", dest="input", required=True)
    dec.add_argument("--write-blocks", dest="write_blocks", action="store_const", const=True)

    tr = cmds.add_parser("trace", help="restriction to the last-axis origin plane")
    _common(tr)
    tr.add_argument("--in", dest="input", required=True)
    tr.add_argument("--name")
    tr.add_argument("--target", help="'lp' or 'besov' increments (default lp at --p)")

    ext = cmds.add_parser("extend", help="extension of a hyperplane field")
    _common(ext)
    ext.add_argument("--in", dest="input", required=True)
    ext.add_argument("--name")

    exp = cmds.add_parser("experiment", help="run a named experiment")
    _common(exp)
    exp.add_argument("experiment", help="one of: " + ", ".join(EXPERIMENTS))
    exp.add_argument("--set", action="append", metavar="KEY=JSON",
                     help="extra experiment keyword (repeatable)")

    rep = cmds.add_parser("report", help="report utilities")
    rsub = rep.add_subparsers(dest="action", required=True, parser_class=_Parser)
    ren = rsub.add_parser("render", help="CSV and gnuplot files from a report JSON")
    _common(ren)
    ren.add_argument("--in", dest="input", required=True)
    return ap


def resolve_config(args) -> dict:
    """Defaults < config file < explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a JSON object")
        unknown = set(data) - set(cfg) - {"input", "experiment"}
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for k, v in vars(args).items():
        if v is not None and k != "config":
            cfg[k] = v
    for key in ("s", "p", "q"):
        cfg[key] = parse_exponent(cfg[key])
    if cfg["threads"] is not None and int(cfg["threads"]) < 1:
        raise ValidationError("--threads must be at least 1")
    return cfg


def _csv_list(v, cast):
    if v is None:
        return None
    if isinstance(v, (list, tuple)):
        return tuple(cast(x) for x in v)
    try:
        return tuple(cast(x) for x in str(v).split(","))
    except ValueError as exc:
        raise ValidationError(f"bad list {v!r}") from exc


def grid_from(cfg) -> GridSpec:
    sizes = _csv_list(cfg["sizes"], int) or (int(cfg["size"]),) * int(cfg["n"])
    periods = _csv_list(cfg["periods"], float) or (float(cfg["period"]),) * len(sizes)
    return GridSpec(sizes, periods)


def _outdir(cfg) -> Path:
    d = Path(cfg["out"])
    d.mkdir(parents=True, exist_ok=True)
    return d


def _load(cfg):
    path = Path(cfg["input"])
    if not path.exists():
        raise ValidationError(f"no such file: {path}")
    return read_gfld(path)


def _params(cfg):
    return BesovParams(cfg["s"], cfg["p"], cfg["q"])


def cmd_field_gen(cfg):
    spec = grid_from(cfg)
    fam = cfg["family"]
    if fam == "random":
        radius = cfg["radius"] or 0.5 * min(spec.nyquist(i) for i in range(spec.ndim))
        u = random_bandlimited(spec, np.random.default_rng(cfg["seed"]), radius)
    elif fam == "smooth":
        u = smooth_test_function(spec)
    elif fam == "omega_N":
        P = build_radial_partition(spec)
        N = int(cfg["N"])
        if not 1 <= N <= omega_shell_budget(P):
            raise GuardViolation(
                f"omega_N with N={N} exceeds the shell budget {omega_shell_budget(P)}")
        u = omega_N(P, find_point_layout(P, N))
    else:
        prof = Profiles.for_period(min(spec.periods))
        fn = psi_k_family if fam == "psi_k" else v_k_family
        u = fn(prof, int(cfg["k"]), spec)
    path = _outdir(cfg) / (cfg["name"] or f"{fam}.gfld")
    write_gfld(path, u)
    return {"path": str(path), "family": fam, "sizes": list(spec.sizes),
            "periods": list(spec.periods), "l2": lp_norm(u, 2)}


def cmd_field_info(cfg):
    u = _load(cfg)
    a = u.samples
    return {"path": cfg["input"], "ndim": u.spec.ndim, "sizes": list(u.spec.sizes),
            "periods": list(u.spec.periods), "dtype": "complex" if np.iscomplexobj(a) else "real",
            "max_abs": float(np.abs(a).max()), "l2": lp_norm(u, 2)}


def cmd_norm(cfg):
    u = _load(cfg)
    kind = cfg["norm_kind"]
    if kind == "lp":
        val = lp_norm(u, cfg["p"])
    elif kind == "mixed":
        val = mixed_norm(u, cfg["p"])
    elif kind == "theta":
        val = besov_norm_theta(u, _params(cfg), build_tensor_partition(u.spec))
    else:
        val = besov_norm(u, _params(cfg), build_radial_partition(u.spec))
    return {"kind": kind, "s": cfg["s"], "p": cfg["p"], "q": cfg["q"], "value": val}


def cmd_decompose(cfg):
    u = _load(cfg)
    P = build_radial_partition(u.spec)
    out = {"J_max": P.J_max, "shell_norms": shell_norms(u, cfg["p"], P).tolist(), "p": cfg["p"]}
    if cfg["write_blocks"]:
        d = _outdir(cfg)
        paths = []
        for j, b in iter_blocks(u, P):
            paths.append(str(d / f"block_{j:02d}.gfld"))
            write_gfld(paths[-1], b)
        out["blocks"] = paths
    return out


def cmd_trace(cfg):
    u = _load(cfg)
    P = build_radial_partition(u.spec)
    target = _params(cfg) if cfg["target"] == "besov" else cfg["p"]
    tr, diag = trace_gamma0(u, P, target=target, keep_partials=False)
    path = _outdir(cfg) / (cfg["name"] or "trace.gfld")
    write_gfld(path, tr)
    return {"path": str(path), "target": diag.target, "verdict": diag.verdict,
            "increments": diag.increments.tolist()}


def cmd_extend(cfg):
    v = _load(cfg)
    # the normal axis copies the first lateral axis
    spec = v.spec.insert_axis(v.spec.ndim, v.spec.sizes[0], v.spec.periods[0])
    Kv = extension_K(v, build_radial_partition(spec))
    path = _outdir(cfg) / (cfg["name"] or "extension.gfld")
    write_gfld(path, Kv)
    return {"path": str(path), "sizes": list(spec.sizes), "periods": list(spec.periods)}


def _parse_set(items):
    out = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ValidationError(f"--set expects KEY=JSON, got {item!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def experiment_kwargs(fn, cfg, explicit) -> dict:
    """Map the generic run flags onto the keywords ``fn`` accepts.

    Only flags given explicitly (command line or config file) are forwarded;
    everything else keeps the experiment's own default. ``size`` feeds a
    ``sizes`` refinement pair as ``(size/2, size)``.
    """
    params = inspect.signature(fn).parameters
    kw = {}
    for key in ("n", "seed", "s", "p", "q"):
        if key in explicit and key in params:
            kw[key] = cfg[key]
    if "size" in explicit:
        size = int(cfg["size"])
        if "size" in params:
            kw["size"] = size
        elif "sizes" in params:
            kw["sizes"] = (size // 2, size)
    extra = _parse_set(cfg["set"])
    bad = set(extra) - set(params)
    if bad:
        raise ValidationError(f"experiment does not take {sorted(bad)}")
    kw.update(extra)
    return kw


def cmd_experiment(cfg, explicit):
    name = cfg["experiment"]
    if name not in EXPERIMENTS:
        raise ValidationError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    fn = EXPERIMENTS[name]
    kw = experiment_kwargs(fn, cfg, explicit)
    rep = fn(**kw)
    run = {k: v for k, v in cfg.items() if k != "set"}
    rep.config = dict(rep.config, run_config=_clean(run), experiment_kwargs=_clean(kw))
    files = _write_report_files(_outdir(cfg), name, rep.to_csv(), rep.gnuplot_data(),
                                cfg["format"], rep.to_json())
    return dict(rep.summary(), files=files)


def _write_report_files(d, name, csv_text, curves, fmt, json_text=None):
    files = []
    if fmt in ("json", "all") and json_text is not None:
        files.append(str(d / f"{name}.json"))
        Path(files[-1]).write_text(json_text + "\n", encoding="utf-8")
    if fmt in ("csv", "all"):
        files.append(str(d / f"{name}.csv"))
        with open(files[-1], "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
    for cname, text in curves.items():
        files.append(str(d / f"{name}_{cname}.dat"))
        Path(files[-1]).write_text(f"# {cname}\n" + text, encoding="utf-8")
    return files


def cmd_report_render(cfg):
    from .experiments.report import ExperimentReport
    try:
        data = json.loads(Path(cfg["input"]).read_text(encoding="utf-8"))
        rep = ExperimentReport(data["experiment"], data.get("config", {}), data.get("trials", []))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValidationError(f"not a report file: {cfg['input']}: {exc}") from exc
    curves = {}
    for fname, fit in data.get("fits", {}).items():
        curves[fname] = "".join(f"{float(a)!r} {float(b)!r}\n" for a, b in fit.get("samples", []))
    files = _write_report_files(_outdir(cfg), rep.experiment, rep.to_csv(), curves,
                                "csv" if cfg["format"] != "json" else "none")
    verdicts = data.get("verdicts", [])
    return {"experiment": rep.experiment, "passed": all(v["passed"] for v in verdicts),
            "verdicts": {v["name"]: v["passed"] for v in verdicts}, "files": files}


def _dispatch(args, cfg, explicit):
    c, a = args.command, getattr(args, "action", None)
    if c == "field":
        return cmd_field_gen(cfg) if a == "gen" else cmd_field_info(cfg)
    if c == "norm":
        return cmd_norm(cfg)
    if c == "decompose":
        return cmd_decompose(cfg)
    if c == "trace":
        return cmd_trace(cfg)
    if c == "extend":
        return cmd_extend(cfg)
    if c == "experiment":
        return cmd_experiment(cfg, explicit)
    return cmd_report_render(cfg)


def _emit(obj, stream):
    stream.write(json.dumps(_clean(obj), sort_keys=True) + "\n")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        explicit = {k for k, v in vars(args).items() if v is not None}
        if args.config:
            explicit |= set(json.loads(Path(args.config).read_text(encoding="utf-8")))
        threads = cfg["threads"] or int(os.environ.get("BESOVLAB_THREADS", "0") or 0) or None
        with _fft.threads(threads or _fft.get_threads()):
            result = _dispatch(args, cfg, explicit)
    except ValidationError as exc:
        _emit({"status": "error", "kind": "validation", "message": str(exc)}, sys.stdout)
        return 2
    except GuardViolation as exc:
        _emit({"status": "error", "kind": "guard", "message": str(exc)}, sys.stdout)
        return 3
    _emit(dict(result, status="ok"), sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
