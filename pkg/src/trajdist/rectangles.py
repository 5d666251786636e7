"""Grid rectangles from the pair family and the boundary-point set B.

Each pair (u, v) contributes the cross product of its maximal contiguous
subsequences (MCS): runs of P that start at a point of ``u`` and continue
until P leaves the doubled box around ``u`` (same for Q and ``v``).  Every
grid point on a rectangle edge lands in B, which is kept in three sorted
orders with predecessor links so the sweeps can step in O(1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .quadtree import ActiveTree, PairFamily, box_dist

__all__ = [
    "GridRectangle",
    "Rectangles",
    "BoundarySet",
    "BoundaryStats",
    "extract_mcs",
    "build_rectangles",
    "build_boundary",
    "boundary_stats",
]


@dataclass(frozen=True)
class GridRectangle:
    x_lo: int
    x_hi: int
    y_lo: int
    y_hi: int
    weight: float


@dataclass
class Rectangles:
    """Column arrays of rectangles, 1-based inclusive grid ranges."""

    x_lo: np.ndarray
    x_hi: np.ndarray
    y_lo: np.ndarray
    y_hi: np.ndarray
    weight: np.ndarray

    def __len__(self):
        return len(self.x_lo)

    def __getitem__(self, k) -> GridRectangle:
        return GridRectangle(int(self.x_lo[k]), int(self.x_hi[k]), int(self.y_lo[k]), int(self.y_hi[k]),
                             float(self.weight[k]))

    def __iter__(self):
        return (self[k] for k in range(len(self)))

    @classmethod
    def from_list(cls, rects):
        rects = list(rects)
        cols = [np.array([getattr(r, f) for r in rects], dtype=np.int64)
                for f in ("x_lo", "x_hi", "y_lo", "y_hi")]
        return cls(*cols, np.array([r.weight for r in rects], dtype=np.float64))


@dataclass
class BoundarySet:
    """Deduplicated boundary points, indexed in (y, x) order.

    ``left``/``below``/``diag`` hold the index of the adjacent point
    (i-1, j), (i, j-1), (i-1, j-1) when it is in B, else -1.  ``left_near``
    and ``below_near`` hold the nearest B point to the left in the same row
    and below in the same column (any distance).  ``xy_order`` lists indices in
    (x, y) order; ``xy_pos`` is its inverse.
    """

    x: np.ndarray
    y: np.ndarray
    width: int  # largest column index allowed
    height: int
    keys_yx: np.ndarray
    xy_order: np.ndarray
    xy_pos: np.ndarray
    keys_xy: np.ndarray
    diag_order: np.ndarray
    left: np.ndarray
    below: np.ndarray
    diag: np.ndarray
    left_near: np.ndarray
    below_near: np.ndarray

    def __len__(self):
        return len(self.x)

    def index(self, i: int, j: int) -> int:
        """Position of (i, j) in (y, x) order, or -1."""
        if not (0 <= i <= self.width and 0 <= j <= self.height):
            return -1
        key = j * (self.width + 1) + i
        pos = int(np.searchsorted(self.keys_yx, key))
        if pos < len(self.keys_yx) and self.keys_yx[pos] == key:
            return pos
        return -1

    def points(self):
        return list(zip(self.x.tolist(), self.y.tolist()))


@dataclass(frozen=True)
class BoundaryStats:
    num_rects: int
    num_boundary_points: int
    overlap_count: int


@nb.njit(cache=True)
def _mcs_kernel(fine, level, cell, ptr, idx, nodes):
    M, d = fine.shape
    out_ptr = np.zeros(nodes.shape[0] + 1, dtype=np.int64)
    cap = 64
    lo_out = np.empty(cap, dtype=np.int64)
    hi_out = np.empty(cap, dtype=np.int64)
    cnt = 0
    box_lo = np.empty(d)
    box_hi = np.empty(d)
    for s in range(nodes.shape[0]):
        v = nodes[s]
        side = float(np.int64(1) << level[v])
        for t in range(d):
            box_lo[t] = cell[v, t] * side - 0.5 * side
            box_hi[t] = (cell[v, t] + 1) * side + 0.5 * side
        a = ptr[v]
        b = ptr[v + 1]
        while a < b:
            x0 = idx[a]
            x = x0
            while x + 1 < M:
                inside = True
                for t in range(d):
                    c = fine[x + 1, t]
                    if c < box_lo[t] or c >= box_hi[t]:
                        inside = False
                        break
                if not inside:
                    break
                x += 1
            if cnt == cap:
                cap *= 2
                nl = np.empty(cap, dtype=np.int64)
                nh = np.empty(cap, dtype=np.int64)
                nl[:cnt] = lo_out[:cnt]
                nh[:cnt] = hi_out[:cnt]
                lo_out = nl
                hi_out = nh
            lo_out[cnt] = x0
            hi_out[cnt] = x
            cnt += 1
            while a < b and idx[a] <= x:
                a += 1
        out_ptr[s + 1] = cnt
    return out_ptr, lo_out[:cnt], hi_out[:cnt]


def extract_mcs(tree: ActiveTree, node: int, side: str = "P"):
    """MCS intervals of one node as 1-based inclusive ``(lo, hi)`` index pairs."""
    if side == "P":
        fine, ptr, idx = tree.fine_p, tree.p_ptr, tree.p_idx
    else:
        fine, ptr, idx = tree.fine_q, tree.q_ptr, tree.q_idx
    _, lo, hi = _mcs_kernel(fine, tree.level, tree.cell, ptr, idx, np.array([node], dtype=np.int64))
    return [(int(a) + 1, int(b) + 1) for a, b in zip(lo, hi)]


@nb.njit(cache=True)
def _cross(pair_u, pair_v, slot_u, slot_v, pu_ptr, pu_lo, pu_hi, qv_ptr, qv_lo, qv_hi,
           cell, level, r_low):
    total = 0
    for k in range(pair_u.shape[0]):
        su = slot_u[k]
        sv = slot_v[k]
        total += (pu_ptr[su + 1] - pu_ptr[su]) * (qv_ptr[sv + 1] - qv_ptr[sv])
    xl = np.empty(total, dtype=np.int64)
    xh = np.empty(total, dtype=np.int64)
    yl = np.empty(total, dtype=np.int64)
    yh = np.empty(total, dtype=np.int64)
    w = np.empty(total)
    pos = 0
    for k in range(pair_u.shape[0]):
        su = slot_u[k]
        sv = slot_v[k]
        wt = box_dist(cell, level, pair_u[k], pair_v[k], r_low)
        for a in range(pu_ptr[su], pu_ptr[su + 1]):
            for b in range(qv_ptr[sv], qv_ptr[sv + 1]):
                xl[pos] = pu_lo[a] + 1
                xh[pos] = pu_hi[a] + 1
                yl[pos] = qv_lo[b] + 1
                yh[pos] = qv_hi[b] + 1
                w[pos] = wt
                pos += 1
    return xl, xh, yl, yh, w


def build_rectangles(family: PairFamily, ed: bool = False):
    """Rectangles of the family and their boundary set.

    With ``ed=True`` B also receives column m+1, row n+1 and the source (1, 1)
    of the padded edit-distance grid.
    """
    tree = family.tree
    m, n = len(tree.fine_p), len(tree.fine_q)
    nodes_u, slot_u = np.unique(family.u, return_inverse=True)
    nodes_v, slot_v = np.unique(family.v, return_inverse=True)
    pu = _mcs_kernel(tree.fine_p, tree.level, tree.cell, tree.p_ptr, tree.p_idx, nodes_u.astype(np.int64))
    qv = _mcs_kernel(tree.fine_q, tree.level, tree.cell, tree.q_ptr, tree.q_idx, nodes_v.astype(np.int64))
    rects = Rectangles(*_cross(family.u, family.v, slot_u.ravel().astype(np.int64),
                               slot_v.ravel().astype(np.int64), *pu, *qv, tree.cell, tree.level, tree.r_low))
    width, height = (m + 1, n + 1) if ed else (m, n)
    B = build_boundary(rects, width, height, ed=ed)
    return rects, B


@nb.njit(cache=True)
def _perimeter_keys(xl, xh, yl, yh, stride, extra):
    total = extra.shape[0]
    for r in range(xl.shape[0]):
        w = xh[r] - xl[r] + 1
        h = yh[r] - yl[r] + 1
        if w == 1 or h == 1:
            total += w * h
        else:
            total += 2 * (w + h) - 4
    keys = np.empty(total, dtype=np.int64)
    pos = 0
    for r in range(xl.shape[0]):
        for x in range(xl[r], xh[r] + 1):
            keys[pos] = yl[r] * stride + x
            pos += 1
        if yh[r] > yl[r]:
            for x in range(xl[r], xh[r] + 1):
                keys[pos] = yh[r] * stride + x
                pos += 1
        for y in range(yl[r] + 1, yh[r]):
            keys[pos] = y * stride + xl[r]
            pos += 1
            if xh[r] > xl[r]:
                keys[pos] = y * stride + xh[r]
                pos += 1
    for t in range(extra.shape[0]):
        keys[pos] = extra[t]
        pos += 1
    return keys


@nb.njit(cache=True)
def _links(bx, by, xy_order, diag_order):
    beta = bx.shape[0]
    left = np.full(beta, -1, dtype=np.int64)
    left_near = np.full(beta, -1, dtype=np.int64)
    below = np.full(beta, -1, dtype=np.int64)
    below_near = np.full(beta, -1, dtype=np.int64)
    diag = np.full(beta, -1, dtype=np.int64)
    for p in range(1, beta):
        if by[p - 1] == by[p]:
            left_near[p] = p - 1
            if bx[p - 1] == bx[p] - 1:
                left[p] = p - 1
    for t in range(1, beta):
        p = xy_order[t]
        q = xy_order[t - 1]
        if bx[q] == bx[p]:
            below_near[p] = q
            if by[q] == by[p] - 1:
                below[p] = q
    for t in range(1, beta):
        p = diag_order[t]
        q = diag_order[t - 1]
        if by[q] - bx[q] == by[p] - bx[p] and bx[q] == bx[p] - 1:
            diag[p] = q
    return left, below, diag, left_near, below_near


@nb.njit(cache=True)
def _counting_order(key, seq, nkeys):
    """Stable sort of the index sequence ``seq`` by ``key[seq]`` (keys in [0, nkeys))."""
    count = np.zeros(nkeys + 1, dtype=np.int64)
    for t in range(seq.shape[0]):
        count[key[seq[t]] + 1] += 1
    for k in range(nkeys):
        count[k + 1] += count[k]
    out = np.empty_like(seq)
    for t in range(seq.shape[0]):
        k = key[seq[t]]
        out[count[k]] = seq[t]
        count[k] += 1
    return out


def build_boundary(rects: Rectangles, width: int, height: int, ed: bool = False) -> BoundarySet:
    stride = width + 1
    if ed:
        col = np.arange(1, height + 1, dtype=np.int64) * stride + width
        row = height * stride + np.arange(1, width + 1, dtype=np.int64)
        extra = np.concatenate([col, row, np.array([stride + 1], dtype=np.int64)])
    else:
        extra = np.zeros(0, dtype=np.int64)
    keys = np.unique(_perimeter_keys(rects.x_lo, rects.x_hi, rects.y_lo, rects.y_hi, stride, extra))
    bx = keys % stride
    by = keys // stride
    hstride = height + 1
    keys_xy_unsorted = bx * hstride + by
    # B is in (y, x) order, so stable counting sorts give the other two orders
    xy_order = _counting_order(bx, np.arange(len(bx), dtype=np.int64), width + 1)
    xy_pos = np.empty_like(xy_order)
    xy_pos[xy_order] = np.arange(len(xy_order))
    diag_order = _counting_order(by - bx + width, xy_order, width + height + 1)
    links = _links(bx, by, xy_order, diag_order)
    return BoundarySet(bx, by, width, height, keys, xy_order, xy_pos, keys_xy_unsorted[xy_order],
                       diag_order, *links)


def boundary_stats(rects, B) -> BoundaryStats:
    """Counts for scaling reports; overlaps are pairs of rectangles with intersecting interiors."""
    if not isinstance(rects, Rectangles):
        rects = Rectangles.from_list(rects)
    nb_points = 0 if B is None else len(B)
    return BoundaryStats(len(rects), nb_points, int(_overlaps(rects.x_lo, rects.x_hi, rects.y_lo, rects.y_hi)))


@nb.njit(cache=True)
def _overlaps(xl, xh, yl, yh):
    # open interiors (xl, xh) x (yl, yh) intersect iff both open intervals do
    order = np.argsort(xl)
    count = 0
    active = np.empty(xl.shape[0], dtype=np.int64)
    na = 0
    for t in range(order.shape[0]):
        r = order[t]
        if xh[r] - xl[r] < 1 or yh[r] - yl[r] < 1:
            continue
        keep = 0
        for s in range(na):
            q = active[s]
            if xh[q] > xl[r]:
                active[keep] = q
                keep += 1
                if max(xl[q], xl[r]) < min(xh[q], xh[r]) and max(yl[q], yl[r]) < min(yh[q], yh[r]):
                    count += 1
        na = keep
        active[na] = r
        na += 1
    return count
