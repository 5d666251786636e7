"""Range-minimum structures used by the boundary sweeps.

All answers use the leftmost-argmin tie rule.  The block-decomposition
structures (static and appendable) store values in a flat pool so the sweep
kernels can keep thousands of small instances in a handful of arrays; the
classes below wrap the same kernels for standalone use.

Block scheme: values are cut into blocks of ``b`` entries.  Each block gets a
Cartesian-tree fingerprint (stack pushes and pops of the classic linear build,
written as bits behind a leading 1), so blocks with equal fingerprints answer
every in-block range identically.  In-block answers are memoised in a global
table keyed by fingerprint; block minima are indexed by a sparse table.
"""
from __future__ import annotations

import math
from collections import deque

import numba as nb
import numpy as np

from .errors import RangeError

__all__ = [
    "StaticRMQ",
    "AppendableRMQ",
    "ColumnMinTree",
    "window_min",
    "static_block_size",
    "APPEND_BLOCK",
]

APPEND_BLOCK = 8
_MAX_B = 8
# fingerprint of a block of s <= 8 entries is below 2**(2s)
TABLE = np.zeros((1 << (2 * _MAX_B)) * 64, dtype=np.int8)
BUILT = np.zeros(1 << (2 * _MAX_B), dtype=np.bool_)


def static_block_size(k: int) -> int:
    if k <= 1:
        return 1
    return max(1, min(_MAX_B, int(math.floor(math.log2(k) / 4))))


@nb.njit(cache=True, inline="always")
def ilog2(x):
    lev = 0
    while (2 << lev) <= x:
        lev += 1
    return lev


@nb.njit(cache=True)
def sparse_levels(nblocks):
    if nblocks <= 0:
        return 0
    return ilog2(nblocks) + 1


@nb.njit(cache=True)
def block_code(V, start, size):
    stack = np.empty(_MAX_B, dtype=np.float64)
    top = 0
    code = 1
    for t in range(size):
        v = V[start + t]
        while top > 0 and stack[top - 1] > v:
            top -= 1
            code = code * 2 + 1
        stack[top] = v
        top += 1
        code = code * 2
    return code


@nb.njit(cache=True)
def fill_table(V, start, size, code, tab, built):
    base = code * 64
    for lo in range(size):
        best = lo
        for hi in range(lo, size):
            if V[start + hi] < V[start + best]:
                best = hi
            tab[base + lo * 8 + hi] = best
    built[code] = True


@nb.njit(cache=True, inline="always")
def in_block(V, start, size, code, lo, hi, tab, built):
    if not built[code]:
        fill_table(V, start, size, code, tab, built)
    return start + tab[code * 64 + lo * 8 + hi]


@nb.njit(cache=True, inline="always")
def pick(V, a, c):
    # a precedes c in index order; keep a on ties
    if V[c] < V[a]:
        return c
    return a


@nb.njit(cache=True)
def static_build(V, o, k, b, codes, co, mins, sp, so):
    """Index ``V[o:o+k]``; ``sp`` needs ``nblocks * sparse_levels(nblocks)`` slots."""
    nblocks = (k + b - 1) // b
    for blk in range(nblocks):
        s0 = o + blk * b
        size = min(b, k - blk * b)
        codes[co + blk] = block_code(V, s0, size)
        best = s0
        for t in range(s0 + 1, s0 + size):
            if V[t] < V[best]:
                best = t
        mins[co + blk] = best
    for blk in range(nblocks):
        sp[so + blk] = mins[co + blk]
    lev = 1
    while (1 << lev) <= nblocks:
        half = 1 << (lev - 1)
        row = so + lev * nblocks
        prev = so + (lev - 1) * nblocks
        for blk in range(nblocks - (1 << lev) + 1):
            sp[row + blk] = pick(V, sp[prev + blk], sp[prev + blk + half])
        lev += 1


@nb.njit(cache=True)
def block_query(V, o, length, b, codes, co, sp, so, stride, ncomplete, open_code, l, r, tab, built):
    """Leftmost argmin (absolute pool index) of ``V[o+l .. o+r]``.

    Blocks ``0..ncomplete-1`` have stored fingerprints and sparse-table rows of
    width ``stride``; a block at index ``ncomplete`` (appendable case) uses
    ``open_code``.
    """
    bl = l // b
    br = r // b
    if bl == br:
        code = codes[co + bl] if bl < ncomplete else open_code
        size = min(b, length - bl * b)
        return in_block(V, o + bl * b, size, code, l - bl * b, r - bl * b, tab, built)
    size_l = min(b, length - bl * b)
    best = in_block(V, o + bl * b, size_l, codes[co + bl], l - bl * b, size_l - 1, tab, built)
    if br - bl > 1:
        a = bl + 1
        c = br - 1
        lev = ilog2(c - a + 1)
        x = sp[so + lev * stride + a]
        y = sp[so + lev * stride + c - (1 << lev) + 1]
        best = pick(V, best, pick(V, x, y))
    code_r = codes[co + br] if br < ncomplete else open_code
    size_r = min(b, length - br * b)
    right = in_block(V, o + br * b, size_r, code_r, 0, r - br * b, tab, built)
    return pick(V, best, right)


# appendable state layout (int64 slots): length, open code, stack size,
# stack[8] (absolute indices), sparse rebuild events
ST_LEN = 0
ST_CODE = 1
ST_TOP = 2
ST_STACK = 3
ST_EVENTS = 11
ST_SIZE = 12


@nb.njit(cache=True)
def append_init(st, sto):
    for t in range(ST_SIZE):
        st[sto + t] = 0
    st[sto + ST_CODE] = 1


@nb.njit(cache=True)
def append_push(V, o, codes, co, sp, so, stride, st, sto, value):
    """Append ``value`` at position ``st[len]``; capacity is the caller's concern."""
    k = st[sto + ST_LEN]
    pos = o + k
    V[pos] = value
    code = st[sto + ST_CODE]
    top = st[sto + ST_TOP]
    while top > 0 and V[st[sto + ST_STACK + top - 1]] > value:
        top -= 1
        code = code * 2 + 1
    st[sto + ST_STACK + top] = pos
    top += 1
    code = code * 2
    k += 1
    st[sto + ST_LEN] = k
    b = 8
    if k % b == 0:
        blk = k // b - 1
        codes[co + blk] = code
        # bottom of the stack is the block's leftmost minimum
        sp[so + blk] = st[sto + ST_STACK]
        lev = 1
        while (1 << lev) <= blk + 1:
            half = 1 << (lev - 1)
            start = blk - (1 << lev) + 1
            sp[so + lev * stride + start] = pick(
                V, sp[so + (lev - 1) * stride + start], sp[so + (lev - 1) * stride + start + half])
            lev += 1
        st[sto + ST_EVENTS] += 1
        code = 1
        top = 0
    st[sto + ST_CODE] = code
    st[sto + ST_TOP] = top


@nb.njit(cache=True)
def append_query(V, o, codes, co, sp, so, stride, st, sto, l, r, tab, built):
    k = st[sto + ST_LEN]
    return block_query(V, o, k, 8, codes, co, sp, so, stride, k // 8, st[sto + ST_CODE], l, r, tab, built)


@nb.njit(cache=True)
def _static_query_one(V, k, b, codes, sp, nblocks, l, r, tab, built):
    return block_query(V, 0, k, b, codes, 0, sp, 0, nblocks, nblocks, 1, l, r, tab, built)


def _check_range(l, r, k):
    if not (0 <= l <= r < k):
        raise RangeError(f"query ({l}, {r}) outside [0, {k})")


class StaticRMQ:
    """O(1)-query range minimum over a fixed array (linear preprocessing)."""

    def __init__(self, values):
        self.values = np.ascontiguousarray(values, dtype=np.float64).ravel().copy()
        k = len(self.values)
        self.b = static_block_size(k)
        self.nblocks = (k + self.b - 1) // self.b
        self.codes = np.zeros(max(self.nblocks, 1), dtype=np.int64)
        self.mins = np.zeros(max(self.nblocks, 1), dtype=np.int64)
        self.sparse = np.zeros(max(self.nblocks * sparse_levels(self.nblocks), 1), dtype=np.int64)
        if k:
            static_build(self.values, 0, k, self.b, self.codes, 0, self.mins, self.sparse, 0)

    def __len__(self):
        return len(self.values)

    def query(self, l: int, r: int):
        _check_range(l, r, len(self.values))
        idx = _static_query_one(self.values, len(self.values), self.b, self.codes, self.sparse,
                                self.nblocks, l, r, TABLE, BUILT)
        return float(self.values[idx]), int(idx)


class AppendableRMQ:
    """Range minimum supporting amortised O(1) appends at the end."""

    def __init__(self, capacity: int = 64):
        self._alloc(max(int(capacity), 8))
        self.state = np.zeros(ST_SIZE, dtype=np.int64)
        append_init(self.state, 0)

    def _alloc(self, cap):
        self.cap = cap
        nblocks = cap // 8 + 1
        self.stride = nblocks
        self.values = np.zeros(cap, dtype=np.float64)
        self.codes = np.zeros(nblocks, dtype=np.int64)
        self.sparse = np.zeros(nblocks * sparse_levels(nblocks), dtype=np.int64)

    def _grow(self):
        # copy into doubled arrays; completed blocks keep their sparse rows
        k = len(self)
        old_vals, old_codes, old_sparse, old_stride = self.values, self.codes, self.sparse, self.stride
        self._alloc(self.cap * 2)
        self.values[:k] = old_vals[:k]
        self.codes[: len(old_codes)] = old_codes
        for lev in range(sparse_levels(old_stride)):
            self.sparse[lev * self.stride: lev * self.stride + old_stride] = \
                old_sparse[lev * old_stride: (lev + 1) * old_stride]

    def __len__(self):
        return int(self.state[ST_LEN])

    @property
    def rebuild_events(self) -> int:
        """Number of block completions that extended the sparse table."""
        return int(self.state[ST_EVENTS])

    def push(self, value: float):
        if len(self) >= self.cap:
            self._grow()
        append_push(self.values, 0, self.codes, 0, self.sparse, 0, self.stride, self.state, 0, float(value))

    def query(self, l: int, r: int):
        _check_range(l, r, len(self))
        idx = append_query(self.values, 0, self.codes, 0, self.sparse, 0, self.stride, self.state, 0,
                           l, r, TABLE, BUILT)
        return float(self.values[idx]), int(idx)


@nb.njit(cache=True)
def colmin_decrease_kernel(tree, size, col, key):
    pos = size + col - 1
    if key >= tree[pos]:
        return
    tree[pos] = key
    pos >>= 1
    while pos >= 1:
        lo = tree[2 * pos]
        hi = tree[2 * pos + 1]
        new = lo if lo < hi else hi
        if tree[pos] == new:
            break
        tree[pos] = new
        pos >>= 1


@nb.njit(cache=True)
def colmin_prefix_kernel(tree, size, i):
    # min over leaves 1..i, iterative over the half-open leaf range [size, size + i)
    res = np.inf
    lo = size
    hi = size + i
    while lo < hi:
        if lo & 1:
            if tree[lo] < res:
                res = tree[lo]
            lo += 1
        if hi & 1:
            hi -= 1
            if tree[hi] < res:
                res = tree[hi]
        lo >>= 1
        hi >>= 1
    return res


def colmin_size(m: int) -> int:
    size = 1
    while size < m:
        size *= 2
    return size


class ColumnMinTree:
    """Decrease-only column minima over columns ``1..m`` with prefix queries."""

    def __init__(self, m: int):
        if m < 1:
            raise RangeError("need at least one column")
        self.m = int(m)
        self.size = colmin_size(self.m)
        self.tree = np.full(2 * self.size, np.inf)

    def decrease(self, col: int, key: float):
        if not (1 <= col <= self.m):
            raise RangeError(f"column {col} outside [1, {self.m}]")
        colmin_decrease_kernel(self.tree, self.size, int(col), float(key))

    def prefix_min(self, i: int) -> float:
        if not (1 <= i <= self.m):
            raise RangeError(f"prefix {i} outside [1, {self.m}]")
        return float(colmin_prefix_kernel(self.tree, self.size, int(i)))


def window_min(values, window: int) -> list:
    """Sliding minimum of each window ending at position t (shorter at the start)."""
    if window < 1:
        raise RangeError("window must be >= 1")
    out = []
    q: deque = deque()
    for t, v in enumerate(values):
        while q and values[q[-1]] > v:
            q.pop()
        q.append(t)
        if q[0] <= t - window:
            q.popleft()
        out.append(values[q[0]])
    return out
