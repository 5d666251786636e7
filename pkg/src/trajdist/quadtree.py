"""Active quadtree over P and Q and the pairing that yields the family F.

Coordinates are measured in fine cells of side ``r_low`` from an anchor snapped
down to a multiple of ``r_high``.  A node at level ``k`` (side ``r_low * 2**k``)
with integer cell ``c`` covers fine cells ``[c * 2**k, (c + 1) * 2**k)`` on every
axis, so a point belongs to exactly one node per level (half-open boxes).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .errors import ParamError
from .geometry import check_pair

__all__ = [
    "ActiveTree",
    "QuadNode",
    "PairFamily",
    "build_active_tree",
    "build_pair_family",
    "node_dist",
    "pairing_factor",
    "scales",
    "MAX_FINE_SPAN",
]

# keep fine-cell coordinates exactly representable as doubles
MAX_FINE_SPAN = float(2 ** 50)


def pairing_factor(eps: float, d: int) -> float:
    """Stop ratio for Pairing: eps/16, shrunk for d > 7 so rectangle weights stay within eps/2."""
    return eps * min(1.0 / 16.0, 1.0 / (6.0 * math.sqrt(d)))


def _pow2_floor(x: float) -> float:
    mant, exp = math.frexp(x)  # x = mant * 2**exp, mant in [0.5, 1)
    return math.ldexp(1.0, exp - 1)


def scales(eps: float, delta_low: float, delta_high: float, n: int, d: int):
    """Return ``(r_low, r_high)``: powers of two bracketing the finest and coarsest node sides."""
    leaf_bound = pairing_factor(eps, d) * (delta_low / (2.0 * n))
    r_low = _pow2_floor(leaf_bound)
    r_high = max(_pow2_floor(4.0 * delta_high), r_low)
    return r_low, r_high


@dataclass
class QuadNode:
    box_min: np.ndarray
    side: float
    level: int
    p_indices: np.ndarray  # 1-based
    q_indices: np.ndarray  # 1-based
    children: list = field(default_factory=list)
    id: int = -1


@dataclass
class ActiveTree:
    """Flat node arrays; node ids are grouped by level, coarsest first."""

    anchor: np.ndarray
    r_low: float
    r_high: float
    levels: int
    level: np.ndarray  # (N,)
    cell: np.ndarray  # (N, d) int64 cell coordinates at the node's level
    child_ptr: np.ndarray  # (N+1,) CSR into child_idx
    child_idx: np.ndarray
    p_ptr: np.ndarray  # (N+1,) CSR into p_idx (0-based point indices, ascending)
    p_idx: np.ndarray
    q_ptr: np.ndarray
    q_idx: np.ndarray
    top: np.ndarray  # ids of nodes at side r_high
    fine_p: np.ndarray  # (m, d) float positions in fine-cell units
    fine_q: np.ndarray
    cells_p: np.ndarray  # (m, d) int64 fine cells
    cells_q: np.ndarray
    node_of_p: np.ndarray  # (levels, m): node id holding p_i at each level
    node_of_q: np.ndarray

    @property
    def num_nodes(self) -> int:
        return len(self.level)

    def side(self, v: int) -> float:
        return self.r_low * float(2 ** int(self.level[v]))

    def node(self, v: int) -> QuadNode:
        lev = int(self.level[v])
        return QuadNode(
            box_min=self.anchor + self.cell[v].astype(np.float64) * self.side(v),
            side=self.side(v),
            level=lev,
            p_indices=self.p_idx[self.p_ptr[v]: self.p_ptr[v + 1]] + 1,
            q_indices=self.q_idx[self.q_ptr[v]: self.q_ptr[v + 1]] + 1,
            children=[int(c) for c in self.child_idx[self.child_ptr[v]: self.child_ptr[v + 1]]],
            id=v,
        )


def _group(inv, count):
    order = np.argsort(inv, kind="stable")
    ptr = np.zeros(count + 1, dtype=np.int64)
    np.cumsum(np.bincount(inv, minlength=count), out=ptr[1:])
    return ptr, order.astype(np.int64)


def _unique_rows(c):
    """Lexicographically sorted unique rows and the inverse map."""
    d = c.shape[1]
    lo = c.min(axis=0)
    span = c.max(axis=0) - lo + 1
    bits = [int(x).bit_length() for x in span]
    if sum(bits) <= 62:
        key = np.zeros(len(c), dtype=np.int64)
        for t in range(d):
            key = (key << bits[t]) | (c[:, t] - lo[t])
        ukey, first, inv = np.unique(key, return_index=True, return_inverse=True)
        return c[first], inv.ravel()
    uniq, inv = np.unique(c, axis=0, return_inverse=True)
    return uniq, inv.ravel()


def build_active_tree(P, Q, r_low: float, r_high: float) -> ActiveTree:
    P, Q = check_pair(P, Q)
    if not (0 < r_low <= r_high):
        raise ParamError("need 0 < r_low <= r_high")
    ratio = r_high / r_low
    levels = int(round(math.log2(ratio))) + 1
    if not math.isclose(2.0 ** (levels - 1), ratio, rel_tol=0, abs_tol=0):
        raise ParamError("r_high / r_low must be a power of two")
    X = np.vstack([P, Q])
    m = len(P)
    anchor = np.floor(X.min(axis=0) / r_high) * r_high
    fine = (X - anchor) / r_low
    if fine.max() >= MAX_FINE_SPAN:
        raise ParamError("scale range too wide for exact fine-cell coordinates")
    cells0 = np.floor(fine).astype(np.int64)

    node_of = np.empty((levels, len(X)), dtype=np.int64)
    lev_arr, cell_arr = [], []
    p_ptrs, p_idxs, q_ptrs, q_idxs = [], [], [], []
    parent_links = []  # per level below the top: parent id of each node
    base = 0
    prev_inv = None
    prev_base = 0
    for k in range(levels - 1, -1, -1):
        ck = cells0 >> k
        uniq, inv = _unique_rows(ck)
        cnt = len(uniq)
        node_of[k] = inv + base
        lev_arr.append(np.full(cnt, k, dtype=np.int64))
        cell_arr.append(uniq)
        pp, pi = _group(inv[:m], cnt)
        qp, qi = _group(inv[m:], cnt)
        p_ptrs.append(pp)
        p_idxs.append(pi)
        q_ptrs.append(qp)
        q_idxs.append(qi)
        if prev_inv is not None:
            parent = np.empty(cnt, dtype=np.int64)
            parent[inv] = prev_inv + prev_base
            parent_links.append((base, parent))
        prev_inv = inv
        prev_base = base
        base += cnt
    N = base
    level = np.concatenate(lev_arr)
    cell = np.concatenate(cell_arr)

    def stitch(ptrs, idxs):
        out_ptr = np.zeros(N + 1, dtype=np.int64)
        off, pos = 0, 0
        for ptr, _ in zip(ptrs, idxs):
            cnt = len(ptr) - 1
            out_ptr[pos + 1: pos + cnt + 1] = ptr[1:] + off
            off += ptr[-1]
            pos += cnt
        return out_ptr, np.concatenate(idxs)

    p_ptr, p_idx = stitch(p_ptrs, p_idxs)
    q_ptr, q_idx = stitch(q_ptrs, q_idxs)
    parents = np.full(N, -1, dtype=np.int64)
    for start, parent in parent_links:
        parents[start: start + len(parent)] = parent
    has_parent = parents >= 0
    kids = np.flatnonzero(has_parent)
    child_ptr, order = _group(parents[kids], N)
    child_idx = kids[order]
    top = np.flatnonzero(level == levels - 1)
    return ActiveTree(anchor, float(r_low), float(r_high), levels, level, cell, child_ptr, child_idx,
                      p_ptr, p_idx, q_ptr, q_idx, top, fine[:m], fine[m:], cells0[:m], cells0[m:],
                      np.ascontiguousarray(node_of[:, :m]), np.ascontiguousarray(node_of[:, m:]))


def node_dist(u: QuadNode, v: QuadNode) -> float:
    """Minimum distance between the two closed boxes."""
    ulo, vlo = np.asarray(u.box_min, float), np.asarray(v.box_min, float)
    gap = np.maximum(0.0, np.maximum(vlo - (ulo + u.side), ulo - (vlo + v.side)))
    return float(math.sqrt(float(np.sum(gap * gap))))


@nb.njit(cache=True, inline="always")
def box_dist(cell, level, u, v, r_low):
    """dsq between nodes u and v, from integer fine-cell extents."""
    s = 0.0
    ku = level[u]
    kv = level[v]
    for t in range(cell.shape[1]):
        ulo = cell[u, t] << ku
        uhi = (cell[u, t] + 1) << ku
        vlo = cell[v, t] << kv
        vhi = (cell[v, t] + 1) << kv
        gap = 0
        if vlo > uhi:
            gap = vlo - uhi
        elif ulo > vhi:
            gap = ulo - vhi
        g = float(gap)
        s += g * g
    return r_low * np.sqrt(s)


@nb.njit(cache=True)
def _pairing(level, cell, child_ptr, child_idx, p_ptr, q_ptr, p_idx, q_idx, cells_p, cells_q,
             node_of_p, node_of_q, seeds_u, seeds_v, r_low, factor, floor_dist):
    cap = 1024
    out_u = np.empty(cap, dtype=np.int64)
    out_v = np.empty(cap, dtype=np.int64)
    cnt = 0
    calls = 0
    scap = 1024
    stack = np.empty((scap, 2), dtype=np.int64)
    for s in range(seeds_u.shape[0]):
        top = 0
        stack[0, 0] = seeds_u[s]
        stack[0, 1] = seeds_v[s]
        top = 1
        while top > 0:
            top -= 1
            u = stack[top, 0]
            v = stack[top, 1]
            if p_ptr[u + 1] - p_ptr[u] == 1 and q_ptr[v + 1] - q_ptr[v] == 1:
                # both sides hold one relevant point: every later split keeps the
                # node containing it, so follow the same split sequence by shifts
                pi = p_idx[p_ptr[u]]
                qj = q_idx[q_ptr[v]]
                ku = level[u]
                kv = level[v]
                while True:
                    calls += 1
                    big = r_low * float(np.int64(1) << (ku if ku > kv else kv))
                    s2 = 0.0
                    for t in range(cells_p.shape[1]):
                        ulo = (cells_p[pi, t] >> ku) << ku
                        uhi = ulo + (np.int64(1) << ku)
                        vlo = (cells_q[qj, t] >> kv) << kv
                        vhi = vlo + (np.int64(1) << kv)
                        gap = 0
                        if vlo > uhi:
                            gap = vlo - uhi
                        elif ulo > vhi:
                            gap = ulo - vhi
                        gf = float(gap)
                        s2 += gf * gf
                    dsq = r_low * np.sqrt(s2)
                    lim = dsq if dsq > floor_dist else floor_dist
                    if big <= factor * lim:
                        break
                    if ku >= kv:
                        ku -= 1
                    else:
                        kv -= 1
                if cnt == cap:
                    cap *= 2
                    nu = np.empty(cap, dtype=np.int64)
                    nv = np.empty(cap, dtype=np.int64)
                    nu[:cnt] = out_u[:cnt]
                    nv[:cnt] = out_v[:cnt]
                    out_u = nu
                    out_v = nv
                out_u[cnt] = node_of_p[ku, pi]
                out_v[cnt] = node_of_q[kv, qj]
                cnt += 1
                continue
            calls += 1
            du = r_low * float(np.int64(1) << level[u])
            dv = r_low * float(np.int64(1) << level[v])
            big = du if du > dv else dv
            dsq = box_dist(cell, level, u, v, r_low)
            lim = dsq if dsq > floor_dist else floor_dist
            if big <= factor * lim:
                if cnt == cap:
                    cap *= 2
                    nu = np.empty(cap, dtype=np.int64)
                    nv = np.empty(cap, dtype=np.int64)
                    nu[:cnt] = out_u[:cnt]
                    nv[:cnt] = out_v[:cnt]
                    out_u = nu
                    out_v = nv
                out_u[cnt] = u
                out_v[cnt] = v
                cnt += 1
                continue
            split_u = level[u] >= level[v]
            w = u if split_u else v
            for t in range(child_ptr[w], child_ptr[w + 1]):
                c = child_idx[t]
                if split_u:
                    if p_ptr[c + 1] == p_ptr[c]:
                        continue
                else:
                    if q_ptr[c + 1] == q_ptr[c]:
                        continue
                if top == scap:
                    scap *= 2
                    ns = np.empty((scap, 2), dtype=np.int64)
                    ns[:top] = stack[:top]
                    stack = ns
                if split_u:
                    stack[top, 0] = c
                    stack[top, 1] = v
                else:
                    stack[top, 0] = u
                    stack[top, 1] = c
                top += 1
    return out_u[:cnt], out_v[:cnt], calls


@dataclass
class PairFamily:
    tree: ActiveTree
    u: np.ndarray  # node ids (P side)
    v: np.ndarray  # node ids (Q side)
    eps: float
    delta_low: float
    delta_high: float
    n: int
    factor: float
    pairing_calls: int

    def __len__(self):
        return len(self.u)

    def dsq(self) -> np.ndarray:
        t = self.tree
        return np.array([box_dist(t.cell, t.level, a, b, t.r_low) for a, b in zip(self.u, self.v)])


def _seeds(tree: ActiveTree):
    top = tree.top
    lookup = {tuple(tree.cell[v]): int(v) for v in top}
    d = tree.cell.shape[1]
    offsets = np.array(np.meshgrid(*[[-1, 0, 1]] * d, indexing="ij")).reshape(d, -1).T
    su, sv = [], []
    for u in top:
        if tree.p_ptr[u + 1] == tree.p_ptr[u]:
            continue
        base = tree.cell[u]
        for off in offsets:
            v = lookup.get(tuple(base + off))
            if v is not None and tree.q_ptr[v + 1] > tree.q_ptr[v]:
                su.append(int(u))
                sv.append(v)
    return np.array(su, dtype=np.int64), np.array(sv, dtype=np.int64)


def build_pair_family(tree: ActiveTree, eps: float, delta_low: float, delta_high: float, n: int) -> PairFamily:
    d = tree.cell.shape[1]
    factor = pairing_factor(eps, d)
    floor_dist = delta_low / (2.0 * n)
    su, sv = _seeds(tree)
    u, v, calls = _pairing(tree.level, tree.cell, tree.child_ptr, tree.child_idx, tree.p_ptr, tree.q_ptr,
                           tree.p_idx, tree.q_idx, tree.cells_p, tree.cells_q, tree.node_of_p, tree.node_of_q,
                           su, sv, tree.r_low, factor, floor_dist)
    return PairFamily(tree, u, v, float(eps), float(delta_low), float(delta_high), int(n), factor, int(calls))
