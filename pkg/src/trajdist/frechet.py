"""Approximate discrete Frechet distance and the initial distance bounds.

``dfr_2approx`` binary-searches a short list of candidate distances, one per
pair of a well-separated pair decomposition, with a grid-bucketed decision
procedure run on simplified sequences.  The result brackets the DTW value
(``dfr <= dtw <= 2n * dfr``) and seeds the quadtree scales.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import ParamError
from .exact_dp import dist
from .geometry import check_pair

__all__ = [
    "Simplification",
    "Decision",
    "DistanceBounds",
    "ExactValue",
    "left_mu_simplify",
    "dfr_decision",
    "candidate_distances",
    "dfr_2approx",
    "dtw_bounds",
    "ed_bounds",
    "EPS0",
    "WSPD_SLACK",
]

EPS0 = 1.0 / 3.0
WSPD_SLACK = 1.2


class Decision(enum.Enum):
    AT_MOST = "at-most"
    EXCEEDS = "exceeds"


@dataclass(frozen=True)
class Simplification:
    indices: np.ndarray  # 1-based, strictly increasing
    mu: float


@dataclass(frozen=True)
class DistanceBounds:
    lower: float
    upper: float


@dataclass(frozen=True)
class ExactValue:
    value: float


@nb.njit(cache=True)
def _simplify(Q, mu):
    n = Q.shape[0]
    keep = np.empty(n, dtype=np.int64)
    keep[0] = 0
    cnt = 1
    last = 0
    for j in range(1, n):
        if dist(Q, Q, j, last) > mu:
            keep[cnt] = j
            cnt += 1
            last = j
    return keep[:cnt]


def left_mu_simplify(Q, mu: float) -> Simplification:
    """Greedy left simplification: keep q_1, then each point farther than mu from the last kept."""
    Q, _ = check_pair(Q, Q)
    if not mu >= 0:
        raise ParamError("mu must be nonnegative")
    return Simplification(_simplify(Q, float(mu)) + 1, float(mu))


@nb.njit(cache=True, inline="always")
def _cell_hash(c):
    h = np.int64(0x345678)
    for k in range(c.shape[0]):
        h = (h ^ c[k]) * np.int64(1000003)
    return h


@nb.njit(cache=True)
def _reachable(P, Q, tau):
    """Whether a monotone coupling of P and Q exists with every pair within tau."""
    m, n, d = P.shape[0], Q.shape[0], P.shape[1]
    if dist(P, Q, 0, 0) > tau or dist(P, Q, m - 1, n - 1) > tau:
        return False
    # bucket P by grid cells of side tau
    cells = np.empty((m, d), dtype=np.int64)
    keys = np.empty(m, dtype=np.int64)
    for i in range(m):
        for k in range(d):
            cells[i, k] = np.int64(np.floor(P[i, k] / tau))
        keys[i] = _cell_hash(cells[i])
    order = np.argsort(keys, kind="mergesort")
    skeys = keys[order]
    nb_off = 1
    for k in range(d):
        nb_off *= 3
    prev_row = np.full(m, -1, dtype=np.int64)  # row stamp where i was reachable
    cur_row = np.full(m, -1, dtype=np.int64)
    seen = np.full(m, -1, dtype=np.int64)
    buf = np.empty(m, dtype=np.int64)
    qc = np.empty(d, dtype=np.int64)
    probe = np.empty(d, dtype=np.int64)
    for j in range(n):
        for k in range(d):
            qc[k] = np.int64(np.floor(Q[j, k] / tau))
        cnt = 0
        for code in range(nb_off):
            c = code
            for k in range(d):
                probe[k] = qc[k] + (c % 3) - 1
                c //= 3
            h = _cell_hash(probe)
            pos = np.searchsorted(skeys, h)
            while pos < m and skeys[pos] == h:
                i = order[pos]
                pos += 1
                if seen[i] != j and dist(P, Q, i, j) <= tau:
                    seen[i] = j
                    buf[cnt] = i
                    cnt += 1
        row = np.sort(buf[:cnt])
        any_reach = False
        for t in range(cnt):
            i = row[t]
            ok = (i == 0 and j == 0)
            if not ok and j > 0:
                ok = prev_row[i] == j - 1 or (i > 0 and prev_row[i - 1] == j - 1)
            if not ok and i > 0:
                ok = cur_row[i - 1] == j
            if ok:
                cur_row[i] = j
                any_reach = True
        if not any_reach:
            return False
        prev_row, cur_row = cur_row, prev_row
    return prev_row[m - 1] == n - 1


@nb.njit(cache=True)
def _reachable_dense(P, Q, tau):
    m, n = P.shape[0], Q.shape[0]
    prev = np.zeros(m, dtype=np.bool_)
    cur = np.zeros(m, dtype=np.bool_)
    for j in range(n):
        for i in range(m):
            ok = False
            if dist(P, Q, i, j) <= tau:
                if i == 0 and j == 0:
                    ok = True
                elif j > 0 and (prev[i] or (i > 0 and prev[i - 1])):
                    ok = True
                elif i > 0 and cur[i - 1]:
                    ok = True
            cur[i] = ok
        prev, cur = cur, prev
    return prev[m - 1]


def _decide(P, Q, delta, eps0):
    # Simplifying each side moves dfr by at most mu, so with mu = eps0*delta/4
    # an exact test at tau = (1 + eps0/2)*delta separates dfr <= delta from
    # dfr > (1 + eps0)*delta.
    mu = eps0 * delta / 4.0
    Ps = P[_simplify(P, mu)]
    Qs = Q[_simplify(Q, mu)]
    tau = (1.0 + eps0 / 2.0) * delta
    span = max(float(np.abs(Ps).max()), float(np.abs(Qs).max()))
    if span / tau > 1e15:
        # grid cells would overflow int64: fall back to the dense scan
        return bool(_reachable_dense(Ps, Qs, tau))
    return bool(_reachable(Ps, Qs, tau))


def dfr_decision(P, Q, delta: float, eps0: float = EPS0) -> Decision:
    """AT_MOST if dfr(P,Q) <= delta, EXCEEDS if dfr > (1+eps0)*delta; either in between."""
    P, Q = check_pair(P, Q)
    if not delta > 0:
        raise ParamError("delta must be positive")
    if not 0 < eps0 <= 1:
        raise ParamError("eps0 must lie in (0, 1]")
    return Decision.AT_MOST if _decide(P, Q, float(delta), float(eps0)) else Decision.EXCEEDS


# ----------------------------------------------------------------------------
# well-separated pairs


@nb.njit(cache=True)
def _split_tree(X):
    """Fair-split tree; returns (lo, hi, start, end, left, right, diam, nodes, perm)."""
    N, d = X.shape
    cap = 2 * N
    lo = np.empty((cap, d))
    hi = np.empty((cap, d))
    start = np.empty(cap, dtype=np.int64)
    end = np.empty(cap, dtype=np.int64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    diam = np.zeros(cap)
    perm = np.arange(N)
    stack = np.empty(cap, dtype=np.int64)
    count = 1
    start[0] = 0
    end[0] = N
    top = 0
    stack[top] = 0
    top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        s, e = start[v], end[v]
        for k in range(d):
            lo[v, k] = X[perm[s], k]
            hi[v, k] = X[perm[s], k]
        for t in range(s + 1, e):
            for k in range(d):
                x = X[perm[t], k]
                if x < lo[v, k]:
                    lo[v, k] = x
                if x > hi[v, k]:
                    hi[v, k] = x
        best = 0
        acc = 0.0
        for k in range(d):
            w = hi[v, k] - lo[v, k]
            acc += w * w
            if w > hi[v, best] - lo[v, best]:
                best = k
        diam[v] = np.sqrt(acc)
        if e - s == 1 or diam[v] == 0.0:
            continue
        cut = 0.5 * (lo[v, best] + hi[v, best])
        a, b = s, e - 1
        while a <= b:
            if X[perm[a], best] <= cut:
                a += 1
            else:
                tmp = perm[a]
                perm[a] = perm[b]
                perm[b] = tmp
                b -= 1
        if a == s or a == e:
            # cut equals the max coordinate only when the node is degenerate
            a = s + (e - s) // 2
        for child, cs, ce in ((count, s, a), (count + 1, a, e)):
            start[child] = cs
            end[child] = ce
            stack[top] = child
            top += 1
        left[v] = count
        right[v] = count + 1
        count += 2
    return lo, hi, start, end, left, right, diam, count, perm


@nb.njit(cache=True)
def _wspd_candidates(X, is_p, sep):
    lo, hi, start, end, left, right, diam, count, perm = _split_tree(X)
    hasp = np.zeros(count, dtype=np.bool_)
    hasq = np.zeros(count, dtype=np.bool_)
    for v in range(count):
        for t in range(start[v], end[v]):
            if is_p[perm[t]]:
                hasp[v] = True
            else:
                hasq[v] = True
    out = np.empty(16, dtype=np.float64)
    cnt = 0
    stack = np.empty((64, 2), dtype=np.int64)
    for u in range(count):
        if left[u] < 0:
            continue
        top = 0
        stack[top, 0] = left[u]
        stack[top, 1] = right[u]
        top += 1
        while top > 0:
            top -= 1
            a = stack[top, 0]
            b = stack[top, 1]
            if not ((hasp[a] and hasq[b]) or (hasq[a] and hasp[b])):
                continue
            r = 0.0
            pa = perm[start[a]]
            pb = perm[start[b]]
            for k in range(X.shape[1]):
                t = X[pa, k] - X[pb, k]
                r += t * t
            r = np.sqrt(r)
            if diam[a] + diam[b] <= r / sep:
                if cnt == out.shape[0]:
                    grown = np.empty(2 * cnt)
                    grown[:cnt] = out
                    out = grown
                out[cnt] = r
                cnt += 1
                continue
            if top + 2 > stack.shape[0]:
                grown2 = np.empty((2 * stack.shape[0], 2), dtype=np.int64)
                grown2[:top] = stack[:top]
                stack = grown2
            if diam[a] >= diam[b]:
                stack[top, 0] = left[a]
                stack[top, 1] = b
                stack[top + 1, 0] = right[a]
                stack[top + 1, 1] = b
            else:
                stack[top, 0] = a
                stack[top, 1] = left[b]
                stack[top + 1, 0] = a
                stack[top + 1, 1] = right[b]
            top += 2
    return out[:cnt]


def candidate_distances(P, Q) -> np.ndarray:
    """Sorted distinct positive distances; every ||p_i q_j|| > 0 is within factor 1.2 of one."""
    P, Q = check_pair(P, Q)
    X = np.vstack([P, Q])
    is_p = np.zeros(len(X), dtype=np.bool_)
    is_p[: len(P)] = True
    # pairs with diam(A) + diam(B) <= r/6 keep every distance within [5r/6, 7r/6]
    vals = _wspd_candidates(X, is_p, 6.0)
    vals = vals[vals > 0]
    return np.unique(vals)


def _collapse(S):
    keep = np.ones(len(S), dtype=bool)
    keep[1:] = np.any(S[1:] != S[:-1], axis=1)
    return S[keep]


def zero_frechet(P, Q) -> bool:
    """True iff some monotone coupling pairs only identical points."""
    a, b = _collapse(P), _collapse(Q)
    return a.shape == b.shape and bool(np.all(a == b))


def dfr_2approx(P, Q) -> float:
    """Value v with dfr(P,Q) <= v <= 2*dfr(P,Q) (0 exactly when dfr is 0)."""
    P, Q = check_pair(P, Q)
    if zero_frechet(P, Q):
        return 0.0
    deltas = WSPD_SLACK * candidate_distances(P, Q)
    # the largest delta is at least dfr, so it always decides AT_MOST
    lo, hi = -1, len(deltas) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _decide(P, Q, float(deltas[mid]), EPS0):
            hi = mid
        else:
            lo = mid
    # AT_MOST at deltas[hi] means dfr <= (1+eps0)*deltas[hi]; EXCEEDS one step
    # below puts deltas[hi] <= 1.2^2 * dfr, so the result is <= 1.92 * dfr
    return float((1.0 + EPS0) * deltas[hi])


def dtw_bounds(P, Q) -> DistanceBounds:
    P, Q = check_pair(P, Q)
    v = dfr_2approx(P, Q)
    lower = v / 2.0
    n = max(len(P), len(Q))
    return DistanceBounds(lower, 4.0 * n * lower)


def ed_bounds(P, Q, g: float):
    P, Q = check_pair(P, Q)
    if not g > 0:
        raise ParamError("gap penalty g must be positive")
    m, n = len(P), len(Q)
    if m == n:
        diag = float(np.sum(np.linalg.norm(P - Q, axis=1)))
        if diag <= g:
            return ExactValue(diag)
    return DistanceBounds(float(g), 2.0 * (m + n) * float(g))
