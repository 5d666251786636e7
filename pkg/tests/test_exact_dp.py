import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import brute_dfr, brute_dtw, brute_ed
from trajdist.errors import DimensionError, ParamError
from trajdist.exact_dp import dtw_table, ed_table, exact_dfr, exact_dtw, exact_ed, path_weight


def seqs(max_len):
    elems = st.floats(-10, 10, allow_nan=False, allow_infinity=False, width=32)
    return st.integers(1, max_len).flatmap(lambda k: arrays(np.float64, (k, 2), elements=elems))


def test_dtw_examples():
    assert exact_dtw([(0, 0), (1, 0)], [(0, 0), (1, 0)]).value == 0.0
    assert exact_dtw([(0, 0)], [(3, 4)]).value == 5.0
    assert exact_dtw([(0, 0), (2, 0)], [(0, 0), (1, 0), (2, 0)]).value == 1.0


def test_ed_examples():
    P = [(0, 0), (1, 2), (3, 1)]
    assert exact_ed(P, P, 0.7).value == 0.0
    assert exact_ed([(0, 0)], [(5, 0)], 1.0).value == 2.0
    assert exact_ed([(0, 0)], [(0.5, 0)], 1.0).value == 0.5


def test_dfr_examples():
    P = [(0, 0), (1, 2)]
    assert exact_dfr(P, P) == 0.0
    assert exact_dfr([(0, 0), (2, 0)], [(0, 0), (1, 0), (2, 0)]) == 1.0
    assert exact_dfr([(0, 0)], [(3, 4)]) == 5.0


def test_errors():
    with pytest.raises(DimensionError):
        exact_dtw([(0, 0)], [(0, 0, 0)])
    with pytest.raises(ParamError):
        exact_ed([(0, 0)], [(1, 0)], 0.0)
    with pytest.raises(DimensionError):
        exact_dfr(np.zeros((0, 2)), [(1, 0)])


@given(seqs(6), seqs(6))
def test_dp_matches_enumeration(P, Q):
    assert exact_dtw(P, Q).value == pytest.approx(brute_dtw(P, Q), rel=1e-12, abs=1e-12)
    assert exact_dfr(P, Q) == pytest.approx(brute_dfr(P, Q), rel=1e-12, abs=1e-12)


@given(seqs(4), seqs(3), st.floats(0.05, 20))
def test_ed_matches_enumeration(P, Q, g):
    assert exact_ed(P, Q, g).value == pytest.approx(brute_ed(P, Q, g), rel=1e-12, abs=1e-12)


@given(seqs(7), seqs(7), st.floats(0.05, 20))
def test_ed_matches_enumeration_recursive(P, Q, g):
    assert exact_ed(P, Q, g).value == pytest.approx(brute_ed(P, Q, g), rel=1e-12, abs=1e-12)


@given(seqs(20), seqs(20), st.floats(0.1, 5))
def test_symmetry(P, Q, g):
    assert exact_dtw(P, Q).value == pytest.approx(exact_dtw(Q, P).value, rel=1e-12, abs=1e-12)
    assert exact_ed(P, Q, g).value == pytest.approx(exact_ed(Q, P, g).value, rel=1e-12, abs=1e-12)


def _admissible(path, m, n):
    if path[0] != (1, 1) or path[-1] != (m, n):
        return False
    return all((i - a, j - b) in {(1, 0), (0, 1), (1, 1)} for (a, b), (i, j) in zip(path, path[1:]))


@given(seqs(25), seqs(25), st.floats(0.1, 5))
def test_paths_are_admissible_and_weigh_the_value(P, Q, g):
    r = exact_dtw(P, Q, path=True)
    assert _admissible(r.path, len(P), len(Q))
    assert path_weight(P, Q, r.path) == pytest.approx(r.value, rel=1e-9, abs=1e-9)
    e = exact_ed(P, Q, g, path=True)
    assert _admissible(e.path, len(P) + 1, len(Q) + 1)
    assert path_weight(P, Q, e.path, "ed", g) == pytest.approx(e.value, rel=1e-9, abs=1e-9)


@given(seqs(30), seqs(30))
def test_dtw_sandwiched_by_frechet(P, Q):
    dfr = exact_dfr(P, Q)
    dtw = exact_dtw(P, Q).value
    n = max(len(P), len(Q))
    assert dfr <= dtw + 1e-9
    assert dtw <= 2 * n * dfr + 1e-9


def test_tables_agree_with_values(rng):
    P = rng.normal(size=(17, 2))
    Q = rng.normal(size=(11, 2))
    assert dtw_table(P, Q).shape == (11, 17)
    assert dtw_table(P, Q)[-1, -1] == exact_dtw(P, Q).value
    T = ed_table(P, Q, 0.8)
    assert T.shape == (12, 18)
    assert T[0, 0] == 0.0
    assert T[-1, -1] == exact_ed(P, Q, 0.8).value


def test_ed_never_exceeds_all_gaps(rng):
    for _ in range(20):
        P = rng.normal(size=(rng.integers(1, 30), 3))
        Q = rng.normal(size=(rng.integers(1, 30), 3))
        g = float(rng.uniform(0.1, 3))
        assert exact_ed(P, Q, g).value <= (len(P) + len(Q)) * g + 1e-12
