import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import FAMILIES, cached_pair
from trajdist.errors import ParamError
from trajdist.exact_dp import exact_dfr, exact_dtw
from trajdist.frechet import (
    EPS0,
    Decision,
    DistanceBounds,
    ExactValue,
    candidate_distances,
    dfr_2approx,
    dfr_decision,
    dtw_bounds,
    ed_bounds,
    left_mu_simplify,
)

elems = st.floats(-50, 50, allow_nan=False, allow_infinity=False, width=32)


def seqs(max_len, d=2):
    return st.integers(1, max_len).flatmap(lambda k: arrays(np.float64, (k, d), elements=elems))


def test_simplify_examples():
    Q = np.array([0, 0.5, 2, 2.4, 5], dtype=float)[:, None]
    assert list(left_mu_simplify(Q, 1.0).indices) == [1, 3, 5]
    distinct = np.arange(6, dtype=float)[:, None]
    assert list(left_mu_simplify(distinct, 0.0).indices) == [1, 2, 3, 4, 5, 6]
    assert list(left_mu_simplify(distinct, 100.0).indices) == [1]


@given(seqs(40), st.floats(0, 30))
def test_simplify_invariants(Q, mu):
    idx = list(left_mu_simplify(Q, mu).indices)
    assert idx[0] == 1
    assert all(a < b for a, b in zip(idx, idx[1:]))
    kept = idx + [len(Q) + 1]
    for a, b in zip(kept, kept[1:]):
        for j in range(a + 1, b):
            assert np.linalg.norm(Q[j - 1] - Q[a - 1]) <= mu
        if b <= len(Q):
            assert np.linalg.norm(Q[b - 1] - Q[a - 1]) > mu


def test_decision_examples():
    P = np.array([[0.0, 0.0], [1.0, 1.0]])
    assert dfr_decision(P, P, 1.0) is Decision.AT_MOST
    assert dfr_decision([[0.0, 0.0]], [[10.0, 0.0]], 1.0, eps0=0.5) is Decision.EXCEEDS
    with pytest.raises(ParamError):
        dfr_decision(P, P, 0.0)


@pytest.mark.parametrize("seed", range(12))
def test_decision_consistent_with_exact(seed):
    P, Q = cached_pair(FAMILIES[seed % 3], 50, 500 + seed)
    dfr = exact_dfr(P, Q)
    for scale in (0.3, 0.6, 0.74, 0.76, 0.9, 1.0, 1.2, 2.0):
        delta = dfr * scale
        ans = dfr_decision(P, Q, delta)
        if dfr <= delta:
            assert ans is Decision.AT_MOST
        if dfr > (1 + EPS0) * delta:
            assert ans is Decision.EXCEEDS


@pytest.mark.parametrize("seed", range(6))
def test_decision_monotone(seed):
    P, Q = cached_pair(FAMILIES[seed % 3], 80, 600 + seed)
    dfr = exact_dfr(P, Q)
    answers = [dfr_decision(P, Q, dfr * s) for s in np.linspace(0.5, 1.3, 40)]
    first = next(k for k, a in enumerate(answers) if a is Decision.AT_MOST)
    assert all(a is Decision.AT_MOST for a in answers[first:])


def test_candidate_examples():
    assert len(candidate_distances([[1.0, 1.0]] * 3, [[1.0, 1.0]] * 2)) == 0
    c = candidate_distances([[0.0, 0.0]], [[8.0, 0.0]])
    assert len(c) >= 1
    assert any(8 / 1.2 <= x <= 8 * 1.2 for x in c)


@pytest.mark.parametrize("seed", range(8))
def test_candidates_cover_every_pair(seed):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(40, 2)) * rng.uniform(0.1, 10)
    Q = rng.normal(size=(40, 2)) + rng.uniform(-3, 3)
    c = np.asarray(candidate_distances(P, Q))
    assert np.all(np.diff(c) > 0)
    assert len(c) <= 40 * (len(P) + len(Q))
    D = np.linalg.norm(P[:, None] - Q[None], axis=2).ravel()
    D = D[D > 0]
    pos = np.clip(np.searchsorted(c, D / 1.2), 0, len(c) - 1)
    assert np.all((c[pos] >= D / 1.2 * (1 - 1e-12)) & (c[pos] <= D * 1.2 * (1 + 1e-12)))


def test_2approx_examples():
    P = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert dfr_2approx(P, P) == 0.0
    v = dfr_2approx([[0.0, 0.0]], [[3.0, 4.0]])
    assert 5.0 <= v <= 10.0


@pytest.mark.parametrize("seed", range(15))
def test_2approx_random_packed(seed):
    P, Q = cached_pair("kappa-packed", 100, 700 + seed)
    dfr = exact_dfr(P, Q)
    v = dfr_2approx(P, Q)
    assert dfr - 1e-9 <= v <= 2 * dfr + 1e-9


@given(seqs(12, d=1), seqs(12, d=1))
def test_2approx_small_arbitrary(P, Q):
    dfr = exact_dfr(P, Q)
    v = dfr_2approx(P, Q)
    assert (v == 0) == (dfr == 0)
    assert dfr - 1e-9 <= v <= 2 * dfr + 1e-9


@given(seqs(8))
def test_2approx_zero_for_repeated_alignment(P):
    # stuttering copies have Frechet distance zero
    Q = np.repeat(P, 2, axis=0)
    assert dfr_2approx(P, Q) == 0.0


def test_dtw_bounds_examples():
    P = np.array([[0.0, 0.0], [2.0, 1.0]])
    assert dtw_bounds(P, P) == DistanceBounds(0.0, 0.0)
    b = dtw_bounds([[0.0, 0.0]], [[3.0, 4.0]])
    assert 2.5 <= b.lower <= 5.0
    assert b.upper == 4 * b.lower


@pytest.mark.parametrize("seed", range(15))
def test_dtw_bounds_sandwich(seed):
    P, Q = cached_pair(FAMILIES[seed % 3], 90, 800 + seed)
    b = dtw_bounds(P, Q)
    dtw = exact_dtw(P, Q).value
    assert b.lower <= dtw + 1e-9
    assert dtw <= b.upper + 1e-9
    assert b.upper == 4 * max(len(P), len(Q)) * b.lower


def test_ed_bounds_examples():
    P = np.array([[0.0, 0.0], [1.0, 1.0]])
    assert ed_bounds(P, P, 1.0) == ExactValue(0.0)
    assert ed_bounds(P, P[:1], 1.0) == DistanceBounds(1.0, 2 * 3 * 1.0)
    Q = P + np.array([[2.5, 0.0]])
    assert ed_bounds(P, Q, 1.0) == DistanceBounds(1.0, 8.0)
    with pytest.raises(ParamError):
        ed_bounds(P, Q, -1.0)


def test_ed_bounds_exact_branch_is_the_diagonal_sum():
    P = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    Q = P + np.array([0.0, 0.1])
    b = ed_bounds(P, Q, 1.0)
    assert isinstance(b, ExactValue)
    assert math.isclose(b.value, 0.3)
