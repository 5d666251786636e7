"""(1+eps)-approximate edit distance with a linear gap penalty.

Runs the boundary sweep of :mod:`dtw_approx` on the padded ``(m+1) x (n+1)``
grid.  Inside a rectangle of weight w the cheapest route from a boundary
point (a, b) to (i, j) costs ``min(i-a, j-b) * w + |(i-a) - (j-b)| * g`` when
``2g > w``, and uses axis steps only otherwise.  Points outside every
rectangle are reached by gap-only paths, which leave the union of rectangles
through its boundary points; those are tracked by a prefix-min tree over
columns.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .dtw_approx import ApproxResult, Mode, _check_eps, _interior_flags, _start_rects, _stats, run_pipeline
from .errors import CoverageError, ParamError
from .exact_dp import exact_ed
from .frechet import ExactValue, ed_bounds
from .geometry import check_pair
from .rectangles import BoundarySet, Rectangles

__all__ = ["EDConfig", "UnionBoundary", "approx_ed", "mark_union_boundary", "ed_rect_cost"]


@dataclass(frozen=True)
class EDConfig:
    g: float
    eps: float

    def __post_init__(self):
        if not self.g > 0:
            raise ParamError("gap penalty g must be positive")
        _check_eps(self.eps)


@dataclass
class UnionBoundary:
    flags: np.ndarray  # over B in (y, x) order
    left_near: np.ndarray  # nearest B point to the left in the row (i0), -1 if none
    below_near: np.ndarray  # nearest B point below in the column (j0), -1 if none

    @property
    def count(self) -> int:
        return int(self.flags.sum())


def mark_union_boundary(rects: Rectangles, B: BoundarySet) -> UnionBoundary:
    """Flag B points that lie in some rectangle but strictly inside none."""
    hstride = B.height + 1
    start_max, _ = _start_rects(rects.x_lo, rects.x_hi, rects.y_lo, rects.y_hi, B.keys_xy, hstride,
                                B.xy_order, len(B), True)
    inside = _interior_flags(B.x, B.y, start_max)
    in_rect = _covered(rects, B)
    return UnionBoundary(in_rect & ~inside, B.left_near, B.below_near)


def _covered(rects: Rectangles, B: BoundarySet) -> np.ndarray:
    # every B point inside the rectangle columns/rows came from some perimeter;
    # only the padding added for the edit-distance grid can lie outside U
    key = B.y * (B.width + 1) + B.x
    perim = np.zeros(len(B), dtype=bool)
    from .rectangles import _perimeter_keys

    keys = np.unique(_perimeter_keys(rects.x_lo, rects.x_hi, rects.y_lo, rects.y_hi, B.width + 1,
                                     np.zeros(0, dtype=np.int64)))
    perim[np.isin(key, keys)] = True
    return perim


def ed_rect_cost(di: int, dj: int, w: float, g: float) -> float:
    """Cheapest route across a rectangle of weight w: di columns and dj rows."""
    if 2 * g <= w:
        return (di + dj) * g
    return min(di, dj) * w + abs(di - dj) * g


def approx_ed(P, Q, cfg: EDConfig | float, eps: float | None = None, keep_state: bool = False) -> ApproxResult:
    """Edit distance within a factor (1 +- eps).

    ``cfg`` is an :class:`EDConfig`, or the gap penalty with ``eps`` given separately.
    """
    if not isinstance(cfg, EDConfig):
        cfg = EDConfig(float(cfg), float(eps))
    P, Q = check_pair(P, Q)
    t0 = time.perf_counter()
    m, n = len(P), len(Q)
    g = cfg.g
    if cfg.eps < 1.0 / max(m, n):
        value = exact_ed(P, Q, g).value
        return ApproxResult(value, Mode.EXACT, _stats(None, time.perf_counter() - t0, "eps below 1/n"))
    bounds = ed_bounds(P, Q, g)
    if isinstance(bounds, ExactValue):
        return ApproxResult(bounds.value, Mode.EXACT, _stats(None, time.perf_counter() - t0, "diagonal within g"))
    # the additive floor delta_low/2n is charged along i+j <= m+n+2 steps;
    # scaling it by m+n keeps the total below eps*ed at the corner
    n_scale = m + n
    try:
        pipe = run_pipeline(P, Q, cfg.eps, bounds, n_scale, ed=True, g=g)
    except ParamError:
        value = exact_ed(P, Q, g).value
        return ApproxResult(value, Mode.EXACT, _stats(None, time.perf_counter() - t0, "scale range too wide"),
                            bounds)
    idx = pipe.B.index(m + 1, n + 1)
    value = float(pipe.state.values[idx])
    if idx < 0 or not math.isfinite(value):
        raise CoverageError("corner (m+1, n+1) not reached")
    res = ApproxResult(value, Mode.APPROX, _stats(pipe, time.perf_counter() - t0), bounds)
    res.stats["g"] = g
    if keep_state:
        res.stats["pipeline"] = pipe
    return res
