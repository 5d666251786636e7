"""(1+eps)-approximate DTW by sweeping the boundary points of a rectangle cover.

Pipeline: bracket dtw with the Frechet estimate, build the active quadtree and
pair family, turn pairs into weighted grid rectangles, then visit B in row
order.  A point strictly inside some rectangle (a "hit") takes its value from
that rectangle's left and bottom boundaries through range-min queries;
otherwise it takes the usual DP step over its in-B neighbours.

The same kernel runs the edit-distance sweep (``ed=True``), which differs in
the affine key offsets inside rectangles and in the no-hit rule.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .errors import CoverageError, ParamError
from .exact_dp import dist, exact_dtw
from .frechet import DistanceBounds, dtw_bounds
from .geometry import check_pair
from .quadtree import build_active_tree, build_pair_family, scales
from .rangemin import (BUILT, ST_LEN, ST_SIZE, TABLE, append_init, append_push, append_query, block_query,
                       colmin_decrease_kernel, colmin_prefix_kernel, colmin_size, ilog2, static_build)
from .rectangles import BoundarySet, Rectangles, build_rectangles

__all__ = ["Mode", "ApproxResult", "SweepState", "approx_dtw", "sweep", "run_pipeline"]


class Mode(str, enum.Enum):
    EXACT = "exact"
    APPROX = "approx"


@dataclass
class ApproxResult:
    value: float
    mode: Mode
    stats: dict = field(default_factory=dict)
    bounds: DistanceBounds | None = None


@dataclass
class SweepState:
    """Per-point output of a sweep, indexed like the boundary set (y, x order)."""

    values: np.ndarray
    hit_rect: np.ndarray  # rectangle used for a hit, -1 for the no-hit rule
    union_boundary: np.ndarray | None  # ED only: flags of points on the union boundary
    rmq_queries: int
    rmq_pushes: int
    rects_built: int


# ----------------------------------------------------------------------------
# preparation


@nb.njit(cache=True)
def _start_rects(xl, xh, yl, yh, keys_xy, hstride, xy_order, beta, strict):
    """For each B point (x, y): rectangle with left edge at x whose rows it can start.

    ``strict=False``: rows y_lo < y <= y_hi, rectangle at least 2x2, keep the
    largest x_hi (hit tracking).  ``strict=True``: rows y_lo < y < y_hi with
    x_hi >= x_lo + 2 (interior tracking).  Returns the rectangle id for the
    first mode and the largest x_hi for the second.
    """
    best = np.full(beta, -1, dtype=np.int64)
    left_start = np.full(xl.shape[0], -1, dtype=np.int64)
    for r in range(xl.shape[0]):
        pos = np.searchsorted(keys_xy, xl[r] * hstride + yl[r])
        left_start[r] = pos
        if strict:
            if xh[r] < xl[r] + 2:
                continue
            top = yh[r] - 1
        else:
            if xh[r] == xl[r] or yh[r] == yl[r]:
                continue
            top = yh[r]
        for y in range(yl[r] + 1, top + 1):
            p = xy_order[pos + y - yl[r]]
            if strict:
                if xh[r] > best[p]:
                    best[p] = xh[r]
            else:
                if best[p] < 0 or xh[r] > xh[best[p]]:
                    best[p] = r
    return best, left_start


@nb.njit(cache=True)
def _interior_flags(bx, by, start_max):
    """Whether each B point lies strictly inside some rectangle."""
    beta = bx.shape[0]
    inside = np.zeros(beta, dtype=np.bool_)
    row = -1
    reach = -1
    for p in range(beta):
        if by[p] != row:
            row = by[p]
            reach = -1
        if reach > bx[p]:
            inside[p] = True
        if start_max[p] > reach:
            reach = start_max[p]
    return inside


def _pool_layout(rects: Rectangles, usable):
    """Offsets of each hittable rectangle's range-min storage in the shared pools."""
    w = (rects.x_hi - rects.x_lo + 1) * usable
    h = (rects.y_hi - rects.y_lo + 1) * usable
    # static (bottom) side: block size as in StaticRMQ
    lw = np.floor(np.log2(np.maximum(w, 1))).astype(np.int64)
    b = np.clip(lw // 4, 1, 8)
    b[w <= 1] = 1
    nblk = np.where(usable, (w + b - 1) // b, 0)
    blev = np.where(nblk > 0, np.floor(np.log2(np.maximum(nblk, 1))).astype(np.int64) + 1, 0)
    # appendable (left) side: block size 8
    lblk = np.where(usable, h // 8 + 1, 0)
    llev = np.where(lblk > 0, np.floor(np.log2(np.maximum(lblk, 1))).astype(np.int64) + 1, 0)

    def offsets(sizes):
        off = np.zeros(len(sizes) + 1, dtype=np.int64)
        np.cumsum(sizes, out=off[1:])
        return off

    return dict(
        b=b.astype(np.int64), nblk=nblk.astype(np.int64), blev=blev.astype(np.int64),
        lblk=lblk.astype(np.int64), llev=llev.astype(np.int64),
        boff=offsets(2 * w), bcoff=offsets(2 * nblk), bsoff=offsets(2 * nblk * blev),
        loff=offsets(2 * h), lcoff=offsets(2 * lblk), lsoff=offsets(2 * lblk * llev),
        lstoff=offsets(2 * ST_SIZE * usable.astype(np.int64)),
    )


# ----------------------------------------------------------------------------
# the sweep


@nb.njit(cache=True)
def _sweep_kernel(P, Q, bx, by, left, below, diag, left_near, below_near, xy_order,
                  xl, xh, yl, yh, rw, start_rect, bot_start, left_start,
                  sb, snblk, sblev, lblk, boff, bcoff, bsoff, loff, lcoff, lsoff, lstoff,
                  ed, g, in_du, ncols, tab, built):
    beta = bx.shape[0]
    nrect = xl.shape[0]
    val = np.full(beta, np.inf)
    hit = np.full(beta, -1, dtype=np.int64)
    ready = np.zeros(nrect, dtype=np.bool_)
    bV = np.empty(boff[nrect])
    bcodes = np.empty(bcoff[nrect], dtype=np.int64)
    bmins = np.empty(bcoff[nrect], dtype=np.int64)
    bsp = np.empty(bsoff[nrect], dtype=np.int64)
    lV = np.empty(loff[nrect])
    lcodes = np.empty(lcoff[nrect], dtype=np.int64)
    lsp = np.empty(lsoff[nrect], dtype=np.int64)
    lst = np.empty(lstoff[nrect], dtype=np.int64)
    size = 1
    while size < ncols:
        size *= 2
    tree = np.full(2 * size, np.inf)
    queries = 0
    pushes = 0
    nbuilt = 0
    cur = -1
    xi = -1
    row = -1
    row_start = 0
    for p in range(beta):
        i = bx[p]
        j = by[p]
        if j != row:
            if ed:
                # union-boundary points of the finished row become sources for later rows
                for q in range(row_start, p):
                    if in_du[q] and val[q] < np.inf:
                        a = bx[q]
                        b = by[q]
                        w_ab = dist(P, Q, a - 1, b - 1)
                        extra = w_ab - 2.0 * g
                        if extra > 0.0:
                            extra = 0.0
                        colmin_decrease_kernel(tree, size, a, val[q] - (a + b) * g + extra)
            row = j
            row_start = p
            cur = -1
            xi = -1
        if cur >= 0 and xl[cur] < i and i <= xi:
            R = cur
            hit[p] = R
            w = rw[R]
            di = i - xl[R]
            dj = j - yl[R]
            if ed and 2.0 * g <= w:
                # axis steps are never worse than diagonals inside R
                v1 = val[xy_order[left_start[R] + dj]] + di * g
                v2 = val[bot_start[R] + di] + dj * g
                val[p] = v1 if v1 < v2 else v2
            else:
                if ed:
                    alpha = g - w
                    beta_ = -g
                else:
                    alpha = 0.0
                    beta_ = -w
                width = xh[R] - xl[R] + 1
                height = yh[R] - yl[R] + 1
                nbk = snblk[R]
                bF = boff[R]
                bS = boff[R] + width
                cF = bcoff[R]
                cS = bcoff[R] + nbk
                sF = bsoff[R]
                sS = bsoff[R] + nbk * sblev[R]
                lstride = lblk[R]
                lF = loff[R]
                lS = loff[R] + height
                lcF = lcoff[R]
                lcS = lcoff[R] + lstride
                lsF = lsoff[R]
                lsS = lsoff[R] + (lsoff[R + 1] - lsoff[R]) // 2
                stF = lstoff[R]
                stS = lstoff[R] + ST_SIZE
                if not ready[R]:
                    ready[R] = True
                    nbuilt += 1
                    for t in range(width):
                        v = val[bot_start[R] + t]
                        bV[bF + t] = v + alpha * t
                        bV[bS + t] = v + beta_ * t
                    static_build(bV, bF, width, sb[R], bcodes, cF, bmins, bsp, sF)
                    static_build(bV, bS, width, sb[R], bcodes, cS, bmins, bsp, sS)
                    append_init(lst, stF)
                    append_init(lst, stS)
                k = lst[stF + ST_LEN]
                while k <= dj:
                    v = val[xy_order[left_start[R] + k]]
                    append_push(lV, lF, lcodes, lcF, lsp, lsF, lstride, lst, stF, v + alpha * k)
                    append_push(lV, lS, lcodes, lcS, lsp, lsS, lstride, lst, stS, v + beta_ * k)
                    pushes += 2
                    k += 1
                best = np.inf
                if di >= dj:
                    if ed:
                        c12 = dj * w + (di - dj) * g
                        c3 = di * w + (dj - di) * g
                    else:
                        c12 = di * w
                        c3 = dj * w
                    x = append_query(lV, lF, lcodes, lcF, lsp, lsF, lstride, lst, stF, 0, dj, tab, built)
                    best = lV[x] + c12
                    if di > dj:
                        x = block_query(bV, bS, width, sb[R], bcodes, cS, bsp, sS, nbk, nbk, 1,
                                        0, di - dj - 1, tab, built)
                        t = bV[x] + c12
                        if t < best:
                            best = t
                        queries += 1
                    x = block_query(bV, bF, width, sb[R], bcodes, cF, bsp, sF, nbk, nbk, 1,
                                    di - dj, di, tab, built)
                    t = bV[x] + c3
                    if t < best:
                        best = t
                    queries += 2
                else:
                    if ed:
                        c12 = di * w + (dj - di) * g
                        c3 = dj * w + (di - dj) * g
                    else:
                        c12 = dj * w
                        c3 = di * w
                    x = block_query(bV, bF, width, sb[R], bcodes, cF, bsp, sF, nbk, nbk, 1,
                                    0, di, tab, built)
                    best = bV[x] + c12
                    x = append_query(lV, lS, lcodes, lcS, lsp, lsS, lstride, lst, stS, 0, dj - di - 1, tab, built)
                    t = lV[x] + c12
                    if t < best:
                        best = t
                    x = append_query(lV, lF, lcodes, lcF, lsp, lsF, lstride, lst, stF, dj - di, dj, tab, built)
                    t = lV[x] + c3
                    if t < best:
                        best = t
                    queries += 3
                val[p] = best
        elif not ed:
            if i == 1 and j == 1:
                val[p] = dist(P, Q, 0, 0)
            else:
                best = np.inf
                q = left[p]
                if q >= 0 and val[q] < best:
                    best = val[q]
                q = below[p]
                if q >= 0 and val[q] < best:
                    best = val[q]
                q = diag[p]
                if q >= 0 and val[q] < best:
                    best = val[q]
                val[p] = best + dist(P, Q, i - 1, j - 1)
        else:
            if i == 1 and j == 1:
                val[p] = 0.0
            elif left[p] >= 0 and below[p] >= 0 and diag[p] >= 0:
                best = val[diag[p]] + dist(P, Q, i - 2, j - 2)
                t = val[left[p]] + g
                if t < best:
                    best = t
                t = val[below[p]] + g
                if t < best:
                    best = t
                val[p] = best
            else:
                best = np.inf
                q = left_near[p]
                if q >= 0:
                    best = val[q] + (i - bx[q]) * g
                q = below_near[p]
                if q >= 0:
                    t = val[q] + (j - by[q]) * g
                    if t < best:
                        best = t
                if i >= 2:
                    t = colmin_prefix_kernel(tree, size, i - 1) + (i + j) * g
                    if t < best:
                        best = t
                    queries += 1
                val[p] = best
        # hit tracking: drop R_curr at its right edge, then let a rectangle
        # whose left edge is here take over if it reaches farther
        if cur >= 0 and i == xi:
            cur = -1
            xi = -1
        s = start_rect[p]
        if s >= 0 and xh[s] > xi:
            cur = s
            xi = xh[s]
    return val, hit, queries, pushes, nbuilt


def sweep(B: BoundarySet, rects: Rectangles, P, Q, ed: bool = False, g: float = 0.0) -> SweepState:
    """Evaluate every boundary point in (y, x) order."""
    P, Q = check_pair(P, Q)
    beta = len(B)
    hstride = B.height + 1
    start_rect, left_start = _start_rects(rects.x_lo, rects.x_hi, rects.y_lo, rects.y_hi, B.keys_xy, hstride,
                                          B.xy_order, beta, False)
    stride = B.width + 1
    bot_start = np.searchsorted(B.keys_yx, rects.y_lo * stride + rects.x_lo).astype(np.int64)
    usable = (rects.x_hi > rects.x_lo) & (rects.y_hi > rects.y_lo)
    lay = _pool_layout(rects, usable)
    m = len(P)
    if ed:
        start_max, _ = _start_rects(rects.x_lo, rects.x_hi, rects.y_lo, rects.y_hi, B.keys_xy, hstride,
                                    B.xy_order, beta, True)
        inside = _interior_flags(B.x, B.y, start_max)
        in_du = (~inside) & (B.x <= m) & (B.y <= len(Q))
        in_du |= (B.x == 1) & (B.y == 1)
    else:
        in_du = np.zeros(beta, dtype=np.bool_)
    val, hit, queries, pushes, nbuilt = _sweep_kernel(
        P, Q, B.x, B.y, B.left, B.below, B.diag, B.left_near, B.below_near, B.xy_order,
        rects.x_lo, rects.x_hi, rects.y_lo, rects.y_hi, rects.weight, start_rect, bot_start, left_start,
        lay["b"], lay["nblk"], lay["blev"], lay["lblk"], lay["boff"], lay["bcoff"], lay["bsoff"],
        lay["loff"], lay["lcoff"], lay["lsoff"], lay["lstoff"],
        bool(ed), float(g), in_du, m + 1, TABLE, BUILT)
    return SweepState(val, hit, in_du if ed else None, int(queries), int(pushes), int(nbuilt))


# ----------------------------------------------------------------------------
# pipeline


def _check_eps(eps):
    if not (0.0 < eps < 1.0):
        raise ParamError("eps must lie in (0, 1)")


@dataclass
class Pipeline:
    family: object
    rects: Rectangles
    B: BoundarySet
    state: SweepState
    bounds: DistanceBounds


def run_pipeline(P, Q, eps: float, bounds: DistanceBounds, n_scale: int, ed: bool = False, g: float = 0.0):
    """Quadtree, pairing, rectangles and sweep for fixed bounds; raises ParamError if scales overflow."""
    d = P.shape[1]
    r_low, r_high = scales(eps, bounds.lower, bounds.upper, n_scale, d)
    tree = build_active_tree(P, Q, r_low, r_high)
    family = build_pair_family(tree, eps, bounds.lower, bounds.upper, n_scale)
    rects, B = build_rectangles(family, ed=ed)
    state = sweep(B, rects, P, Q, ed=ed, g=g)
    return Pipeline(family, rects, B, state, bounds)


def _stats(pipe: Pipeline | None, elapsed, note=None):
    if pipe is None:
        out = dict(num_rects=0, boundary_points=0, pairs=0, pairing_calls=0, union_boundary_points=None)
    else:
        ub = pipe.state.union_boundary
        out = dict(
            num_rects=len(pipe.rects),
            boundary_points=len(pipe.B),
            pairs=len(pipe.family),
            pairing_calls=pipe.family.pairing_calls,
            union_boundary_points=None if ub is None else int(ub.sum()),
            rmq_queries=pipe.state.rmq_queries,
            rmq_pushes=pipe.state.rmq_pushes,
            rects_built=pipe.state.rects_built,
        )
    out["elapsed"] = elapsed
    if note:
        out["note"] = note
    return out


def approx_dtw(P, Q, eps: float, keep_state: bool = False) -> ApproxResult:
    """DTW within a factor (1 +- eps); exact DP when eps < 1/n."""
    P, Q = check_pair(P, Q)
    _check_eps(eps)
    t0 = time.perf_counter()
    m, n = len(P), len(Q)
    N = max(m, n)
    if eps < 1.0 / N:
        value = exact_dtw(P, Q).value
        return ApproxResult(value, Mode.EXACT, _stats(None, time.perf_counter() - t0, "eps below 1/n"))
    bounds = dtw_bounds(P, Q)
    if bounds.lower == 0.0:
        return ApproxResult(0.0, Mode.EXACT, _stats(None, time.perf_counter() - t0, "zero Frechet distance"), bounds)
    try:
        pipe = run_pipeline(P, Q, eps, bounds, N)
    except ParamError:
        value = exact_dtw(P, Q).value
        return ApproxResult(value, Mode.EXACT, _stats(None, time.perf_counter() - t0, "scale range too wide"),
                            bounds)
    idx = pipe.B.index(m, n)
    if idx < 0 or not math.isfinite(pipe.state.values[idx]):
        raise CoverageError("corner (m, n) not reached by the rectangle cover")
    res = ApproxResult(float(pipe.state.values[idx]), Mode.APPROX, _stats(pipe, time.perf_counter() - t0), bounds)
    if keep_state:
        res.stats["pipeline"] = pipe
    return res
