"""Littlewood-Paley decompositions, Besov quasi-norms and hyperplane traces
on periodic grids."""
from ._fft import get_threads, set_threads
from .besov import (BesovParams, besov_norm, besov_norm_theta, mixed_norm, nikolskii_ratio,
                    parse_exponent, series_B)
from .errors import GuardViolation, ValidationError
from .grid import (GridField, GridSpec, SpectralField, dilate_integer, forward_transform,
                   inverse_transform, lp_norm, read_gfld, restrict_hyperplane,
                   tensor_with_delta, translate_by_grid_shift, write_gfld)
from .littlewood_paley import (CutoffProfile, analyze, build_radial_partition,
                               build_tensor_partition, smooth_step, synthesize, theta_analyze)
from .trace_ext import (continuity_profile, dual_estimate_ratio, dual_norm_B, extension_K,
                        trace_gamma0)

__version__ = "0.1.0"
