import numpy as np
import pytest

from conftest import FAMILIES, cached_pair
from oracles import brute_hits, frozen_rect_dp
from trajdist.dtw_approx import Mode, approx_dtw, sweep
from trajdist.errors import DimensionError, ParamError
from trajdist.exact_dp import dtw_table, exact_dtw
from trajdist.geometry import gen_pair
from trajdist.rectangles import GridRectangle, Rectangles, build_boundary


def test_identical_is_zero():
    P, _ = cached_pair("kappa-packed", 60, 1)
    r = approx_dtw(P, P, 0.25)
    assert r.value == 0.0 and r.mode is Mode.EXACT


def test_stuttered_copy_is_zero():
    P, _ = cached_pair("backbone", 40, 2)
    assert approx_dtw(P, np.repeat(P, 3, axis=0), 0.3).value == 0.0


def test_tiny_eps_falls_back_bit_for_bit():
    P, Q = cached_pair("kappa-bounded", 10, 3)
    r = approx_dtw(P, Q, 1e-9)
    assert r.mode is Mode.EXACT
    assert r.value == exact_dtw(P, Q).value


def test_bad_arguments():
    P = np.zeros((3, 2))
    with pytest.raises(ParamError):
        approx_dtw(P, P + 1, 0.0)
    with pytest.raises(ParamError):
        approx_dtw(P, P + 1, 1.0)
    with pytest.raises(DimensionError):
        approx_dtw(P, np.zeros((3, 3)), 0.5)


def test_sweep_single_cell():
    rects = Rectangles.from_list([GridRectangle(1, 1, 1, 1, 5.0)])
    B = build_boundary(rects, 1, 1)
    st = sweep(B, rects, [[0.0, 0.0]], [[3.0, 4.0]])
    assert st.values[B.index(1, 1)] == 5.0


def test_sweep_uniform_square():
    w = 1.75
    P = np.zeros((3, 2))
    Q = np.tile([[w, 0.0]], (3, 1))
    rects = Rectangles.from_list([GridRectangle(1, 3, 1, 3, w)])
    B = build_boundary(rects, 3, 3)
    st = sweep(B, rects, P, Q)
    k = B.index(3, 3)
    assert st.values[k] == 3 * w
    assert st.hit_rect[k] == 0
    assert st.values[B.index(1, 3)] == 3 * w  # a column of three cells


@pytest.mark.parametrize("seed", range(12))
def test_within_eps(seed):
    fam = FAMILIES[seed % 3]
    eps = (0.1, 0.25, 0.5)[(seed // 3) % 3]
    P, Q = cached_pair(fam, 128, 2000 + seed)
    exact = exact_dtw(P, Q).value
    r = approx_dtw(P, Q, eps)
    assert (1 - eps) * exact - 1e-9 <= r.value <= (1 + eps) * exact + 1e-9


def _pipeline(seed, n=48, eps=0.25, fam=None):
    # translated copies: boxes hold several points, so rectangles get hit
    P, Q = gen_pair(fam or FAMILIES[seed % 3], n, 3000 + seed, kind=3)
    r = approx_dtw(P, Q, eps, keep_state=True)
    assert r.mode is Mode.APPROX
    return P, Q, r, r.stats["pipeline"]


@pytest.mark.parametrize("seed", range(9))
def test_per_point_error_bound(seed):
    eps = (0.1, 0.25, 0.5)[seed % 3]
    P, Q, r, pipe = _pipeline(seed, n=60, eps=eps)
    T = dtw_table(P, Q)
    B, vals = pipe.B, pipe.state.values
    mu = T[B.y - 1, B.x - 1]
    N = max(len(P), len(Q))
    slack = 0.5 * eps * (mu + (B.x + B.y) * pipe.bounds.lower / (2 * N)) + 1e-9
    check = mu <= pipe.bounds.upper
    assert np.all(np.abs(vals - mu)[check] <= slack[check])


@pytest.mark.parametrize("seed", range(6))
def test_hit_tracker_is_sound(seed):
    P, Q, r, pipe = _pipeline(seed, n=40)
    rects, B, st = pipe.rects, pipe.B, pipe.state
    for k, (i, j) in enumerate(B.points()):
        hits = brute_hits(rects, i, j)
        if st.hit_rect[k] < 0:
            assert hits == []
        else:
            assert st.hit_rect[k] in hits
            assert rects.x_hi[st.hit_rect[k]] == max(rects.x_hi[h] for h in hits)


def test_hit_values_match_frozen_rectangle_dp():
    checked = 0
    for seed in range(6):
        P, Q, r, pipe = _pipeline(seed, n=64, fam="kappa-packed")
        rects, B, st = pipe.rects, pipe.B, pipe.state
        by_rect = {}
        for k in np.flatnonzero(st.hit_rect >= 0):
            by_rect.setdefault(int(st.hit_rect[k]), []).append(int(k))
        for rid, ks in list(by_rect.items())[:300]:
            R = rects[rid]
            sources = {}
            for b in range(R.y_lo, R.y_hi + 1):
                sources[(R.x_lo, b)] = st.values[B.index(R.x_lo, b)]
            for a in range(R.x_lo, R.x_hi + 1):
                sources[(a, R.y_lo)] = st.values[B.index(a, R.y_lo)]
            D = frozen_rect_dp(R, sources, R.weight, R.weight, R.weight)
            for k in ks:
                want = D[(int(B.x[k]), int(B.y[k]))]
                assert st.values[k] == pytest.approx(want, rel=1e-12, abs=1e-12)
                checked += 1
    assert checked > 100


@pytest.mark.parametrize("seed", range(4))
def test_rmq_work_is_linear_in_boundary(seed):
    P, Q, r, pipe = _pipeline(seed, n=128)
    beta = len(pipe.B)
    assert pipe.state.rmq_queries <= 3 * beta
    assert pipe.state.rmq_pushes <= 4 * beta
    assert np.all(np.isfinite(pipe.state.values[pipe.B.index(len(P), len(Q))]))


def test_stats_fields():
    P, Q = cached_pair("kappa-packed", 64, 77)
    r = approx_dtw(P, Q, 0.3)
    for key in ("num_rects", "boundary_points", "pairs", "pairing_calls", "elapsed"):
        assert key in r.stats
    assert r.bounds.lower <= r.value
