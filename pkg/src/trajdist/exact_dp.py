"""Quadratic exact oracles for DTW, edit distance and discrete Frechet distance.

Grid coordinates are 1-based: ``(i, j)`` pairs ``p_i`` with ``q_j``.  The edit
distance runs on the padded ``(m+1) x (n+1)`` grid whose diagonal edge out of
``(i, j)`` matches ``p_i`` with ``q_j`` and whose axis edges cost ``g``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import ParamError
from .geometry import check_pair

__all__ = ["DPResult", "exact_dtw", "exact_ed", "exact_dfr", "dtw_table", "ed_table", "path_weight"]


@dataclass
class DPResult:
    value: float
    path: list | None = None


@nb.njit(cache=True, inline="always")
def dist(P, Q, i, j):
    # 0-based rows
    s = 0.0
    for k in range(P.shape[1]):
        t = P[i, k] - Q[j, k]
        s += t * t
    return np.sqrt(s)


@nb.njit(cache=True)
def dtw_value(P, Q):
    m, n = P.shape[0], Q.shape[0]
    prev = np.empty(m)
    cur = np.empty(m)
    acc = 0.0
    for i in range(m):
        acc += dist(P, Q, i, 0)
        prev[i] = acc
    for j in range(1, n):
        cur[0] = prev[0] + dist(P, Q, 0, j)
        for i in range(1, m):
            best = prev[i - 1]
            if prev[i] < best:
                best = prev[i]
            if cur[i - 1] < best:
                best = cur[i - 1]
            cur[i] = best + dist(P, Q, i, j)
        prev, cur = cur, prev
    return prev[m - 1]


@nb.njit(cache=True)
def dtw_full(P, Q):
    """Table ``T[j-1, i-1] = mu(i, j)`` (row per Q index)."""
    m, n = P.shape[0], Q.shape[0]
    T = np.empty((n, m))
    acc = 0.0
    for i in range(m):
        acc += dist(P, Q, i, 0)
        T[0, i] = acc
    for j in range(1, n):
        T[j, 0] = T[j - 1, 0] + dist(P, Q, 0, j)
        for i in range(1, m):
            best = T[j - 1, i - 1]
            if T[j - 1, i] < best:
                best = T[j - 1, i]
            if T[j, i - 1] < best:
                best = T[j, i - 1]
            T[j, i] = best + dist(P, Q, i, j)
    return T


@nb.njit(cache=True)
def dfr_value(P, Q):
    m, n = P.shape[0], Q.shape[0]
    prev = np.empty(m)
    cur = np.empty(m)
    acc = 0.0
    for i in range(m):
        d = dist(P, Q, i, 0)
        if d > acc:
            acc = d
        prev[i] = acc
    for j in range(1, n):
        d = dist(P, Q, 0, j)
        cur[0] = prev[0] if prev[0] > d else d
        for i in range(1, m):
            best = prev[i - 1]
            if prev[i] < best:
                best = prev[i]
            if cur[i - 1] < best:
                best = cur[i - 1]
            d = dist(P, Q, i, j)
            cur[i] = best if best > d else d
        prev, cur = cur, prev
    return prev[m - 1]


@nb.njit(cache=True)
def ed_value(P, Q, g):
    m, n = P.shape[0], Q.shape[0]
    prev = np.empty(m + 1)
    cur = np.empty(m + 1)
    for i in range(m + 1):
        prev[i] = i * g
    for j in range(1, n + 1):
        cur[0] = j * g
        for i in range(1, m + 1):
            best = prev[i - 1] + dist(P, Q, i - 1, j - 1)
            t = prev[i] + g
            if t < best:
                best = t
            t = cur[i - 1] + g
            if t < best:
                best = t
            cur[i] = best
        prev, cur = cur, prev
    return prev[m]


@nb.njit(cache=True)
def ed_full(P, Q, g):
    """Table ``T[j-1, i-1] = mu(i, j)`` on the padded grid, ``1 <= i <= m+1``."""
    m, n = P.shape[0], Q.shape[0]
    T = np.empty((n + 1, m + 1))
    for i in range(m + 1):
        T[0, i] = i * g
    for j in range(1, n + 1):
        T[j, 0] = j * g
        for i in range(1, m + 1):
            best = T[j - 1, i - 1] + dist(P, Q, i - 1, j - 1)
            t = T[j - 1, i] + g
            if t < best:
                best = t
            t = T[j, i - 1] + g
            if t < best:
                best = t
            T[j, i] = best
    return T


def _trace(T, step_cost):
    # walk back from the top-right corner; ties prefer diagonal, vertical, horizontal
    j, i = T.shape[0] - 1, T.shape[1] - 1
    path = [(i + 1, j + 1)]
    while i > 0 or j > 0:
        here = T[j, i]
        options = []
        if i > 0 and j > 0:
            options.append((i - 1, j - 1))
        if j > 0:
            options.append((i, j - 1))
        if i > 0:
            options.append((i - 1, j))
        for a, b in options:
            if T[b, a] + step_cost(a, b, i, j) == here:
                i, j = a, b
                break
        else:
            # rounding made no option reproduce the value exactly; take the closest
            a, b = min(options, key=lambda ab: abs(T[ab[1], ab[0]] + step_cost(ab[0], ab[1], i, j) - here))
            i, j = a, b
        path.append((i + 1, j + 1))
    path.reverse()
    return path


def exact_dtw(P, Q, path: bool = False) -> DPResult:
    P, Q = check_pair(P, Q)
    if not path:
        return DPResult(float(dtw_value(P, Q)))
    T = dtw_full(P, Q)

    def cost(a, b, i, j):
        return float(np.linalg.norm(P[i] - Q[j]))

    return DPResult(float(T[-1, -1]), _trace(T, cost))


def exact_ed(P, Q, g: float, path: bool = False) -> DPResult:
    P, Q = check_pair(P, Q)
    if not g > 0:
        raise ParamError("gap penalty g must be positive")
    g = float(g)
    if not path:
        return DPResult(float(ed_value(P, Q, g)))
    T = ed_full(P, Q, g)

    def cost(a, b, i, j):
        if a == i - 1 and b == j - 1:
            return float(np.linalg.norm(P[a] - Q[b]))
        return g

    return DPResult(float(T[-1, -1]), _trace(T, cost))


def exact_dfr(P, Q) -> float:
    P, Q = check_pair(P, Q)
    return float(dfr_value(P, Q))


def dtw_table(P, Q) -> np.ndarray:
    """Full DTW table indexed ``[j-1, i-1]``."""
    P, Q = check_pair(P, Q)
    return dtw_full(P, Q)


def ed_table(P, Q, g: float) -> np.ndarray:
    """Full padded edit-distance table indexed ``[j-1, i-1]``, shape ``(n+1, m+1)``."""
    P, Q = check_pair(P, Q)
    if not g > 0:
        raise ParamError("gap penalty g must be positive")
    return ed_full(P, Q, float(g))


def path_weight(P, Q, path, kind: str = "dtw", g: float | None = None) -> float:
    """Recompute the weight of a grid path from scratch."""
    P, Q = check_pair(P, Q)
    if kind == "dtw":
        return float(sum(np.linalg.norm(P[i - 1] - Q[j - 1]) for i, j in path))
    total = 0.0
    for (a, b), (i, j) in zip(path, path[1:]):
        if i == a + 1 and j == b + 1:
            total += float(np.linalg.norm(P[a - 1] - Q[b - 1]))
        else:
            total += g
    return total
