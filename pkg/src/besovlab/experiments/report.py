"""Experiment records and their serializations (JSON, CSV, gnuplot data)."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np


def _clean(v):
    """Make values JSON friendly; complex dust is dropped at report time."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, complex):
        v = v.real
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    return v


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    value: object
    tolerance: object
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: value={self.value} tolerance={self.tolerance} {self.detail}".rstrip()


def stability(coarse, fine, band):
    """Relative change of an empirical constant under grid refinement."""
    rel = abs(fine - coarse) / abs(coarse) if coarse else float("inf")
    return {"coarse": coarse, "fine": fine, "rel_change": rel, "band": band,
            "stable": bool(rel <= band)}


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    trials: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    stability: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    curves: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)

    def verdict(self, name):
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def to_dict(self):
        return _clean({
            "experiment": self.experiment,
            "config": self.config,
            "trials": self.trials,
            "fits": {k: f.as_dict() if hasattr(f, "as_dict") else f for k, f in self.fits.items()},
            "constants": self.constants,
            "stability": self.stability,
            "verdicts": [{"name": v.name, "passed": v.passed, "value": v.value,
                          "tolerance": v.tolerance, "detail": v.detail} for v in self.verdicts],
            "passed": self.passed,
        })

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)

    def to_csv(self):
        rows = [_clean(r) for r in self.trials]
        cols = []
        for r in rows:
            for k in r:
                if k not in cols:
                    cols.append(k)
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\r\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
        return buf.getvalue()

    def gnuplot_data(self):
        """Two-column text blocks keyed by curve name (fits and raw curves)."""
        out = {}
        for name, f in self.fits.items():
            if hasattr(f, "x"):
                out[name] = list(zip(f.x, f.y))
        for name, pts in self.curves.items():
            out[name] = [tuple(p) for p in pts]
        return {k: "".join(f"{float(a)!r} {float(b)!r}\n" for a, b in v) for k, v in out.items()}

    def summary(self):
        return {"experiment": self.experiment, "passed": self.passed,
                "verdicts": {v.name: v.passed for v in self.verdicts}}
