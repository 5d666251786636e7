"""Approximate DTW, edit distance and discrete Frechet distance for well-behaved curves."""
from .dtw_approx import ApproxResult, Mode, approx_dtw
from .ed_approx import EDConfig, approx_ed
from .errors import (
    CoverageError,
    DimensionError,
    GenerationError,
    ParamError,
    ParseError,
    RangeError,
    TrajdistError,
)
from .exact_dp import DPResult, exact_dfr, exact_dtw, exact_ed
from .frechet import dfr_2approx, dtw_bounds, ed_bounds
from .geometry import CurveFamilyParams, Family, euclid_dist, gen_curve, gen_pair, validate_family
from .io import parse_trajectory, write_trajectory
from .rangemin import AppendableRMQ, ColumnMinTree, StaticRMQ, window_min

__version__ = "0.1.0"

__all__ = [
    "ApproxResult", "Mode", "approx_dtw", "EDConfig", "approx_ed",
    "CoverageError", "DimensionError", "GenerationError", "ParamError", "ParseError", "RangeError",
    "TrajdistError", "DPResult", "exact_dfr", "exact_dtw", "exact_ed", "dfr_2approx", "dtw_bounds",
    "ed_bounds", "CurveFamilyParams", "Family", "euclid_dist", "gen_curve", "gen_pair", "validate_family",
    "parse_trajectory", "write_trajectory", "AppendableRMQ", "ColumnMinTree", "StaticRMQ", "window_min",
]
