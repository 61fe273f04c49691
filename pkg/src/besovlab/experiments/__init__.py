"""Experiment suites, power-law fits and report records."""
from .corpus import random_bandlimited, random_block_series, run_trials, trial_rngs
from .fitting import PowerLawFit, fit_power_law, log2_slope
from .report import ExperimentReport, Verdict, stability
from .suites import (exp_consistency, exp_continuity, exp_dual, exp_nbord, exp_nikolskii,
                     exp_omega, exp_partition, exp_quasinorm, exp_right_inverse, exp_scaling,
                     exp_sobolev, exp_theta, exp_trace_bound, exp_vk, exp_ythm)

EXPERIMENTS = {
    "partition": exp_partition,
    "theta": exp_theta,
    "scaling": exp_scaling,
    "nikolskii": exp_nikolskii,
    "continuity": exp_continuity,
    "right_inverse": exp_right_inverse,
    "consistency": exp_consistency,
    "trace_bound": exp_trace_bound,
    "sobolev": exp_sobolev,
    "ythm": exp_ythm,
    "omega": exp_omega,
    "nbord": exp_nbord,
    "dual": exp_dual,
    "vk": exp_vk,
    "quasinorm": exp_quasinorm,
}
