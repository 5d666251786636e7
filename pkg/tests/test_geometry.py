import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from trajdist.errors import DimensionError, ParamError
from trajdist.geometry import (
    CurveFamilyParams,
    Family,
    euclid_dist,
    gen_curve,
    gen_pair,
    polyline_length_in_ball,
    validate_family,
)

coord = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("p, q, want", [
    ((0, 0), (0, 0), 0.0),
    ((0, 0), (3, 4), 5.0),
    ((1, 1), (4, 5), 5.0),
])
def test_euclid_examples(p, q, want):
    assert euclid_dist(p, q) == want


def test_euclid_dimension_mismatch():
    with pytest.raises(DimensionError):
        euclid_dist((0, 0), (1, 2, 3))


@given(st.lists(st.tuples(coord, coord, coord), min_size=3, max_size=3))
def test_euclid_metric_axioms(pts):
    a, b, c = (np.array(p) for p in pts)
    ab, ba = euclid_dist(a, b), euclid_dist(b, a)
    assert ab == ba
    scale = 1e-12 * max(1.0, ab, euclid_dist(a, c), euclid_dist(c, b))
    assert ab <= euclid_dist(a, c) + euclid_dist(c, b) + scale


def test_family_parse_aliases():
    assert Family.parse("kappa_packed") is Family.KAPPA_PACKED
    assert Family.parse("bounded") is Family.KAPPA_BOUNDED
    with pytest.raises(ParamError):
        Family.parse("zigzag")


def test_params_validation():
    with pytest.raises(ParamError):
        CurveFamilyParams("kappa-packed", kappa=0)
    with pytest.raises(ParamError):
        CurveFamilyParams("backbone", c1=2.0, c2=1.5)


def test_backbone_single_step_is_exact():
    pts = gen_curve(CurveFamilyParams("backbone", c1=1.5, c2=1.5, seed=3), 2)
    assert euclid_dist(pts[0], pts[1]) == 1.5


def test_packed_small_curve_validates():
    params = CurveFamilyParams("kappa-packed", seed=1)
    pts = gen_curve(params, 4)
    assert validate_family(pts, params).ok


@pytest.mark.parametrize("family", [f.value for f in Family])
def test_generator_is_deterministic(family):
    params = CurveFamilyParams(family, seed=99)
    a = gen_curve(params, 150)
    b = gen_curve(params, 150)
    assert a.shape == (150, 2)
    assert np.array_equal(a, b)
    other = gen_curve(CurveFamilyParams(family, seed=100), 150)
    assert not np.array_equal(a, other)


def test_generator_rejects_tiny_n():
    with pytest.raises(ParamError):
        gen_curve(CurveFamilyParams("kappa-packed"), 1)


def test_segment_is_two_packed():
    seg = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert validate_family(seg, CurveFamilyParams("kappa-packed", kappa=2.0)).ok


def test_close_points_fail_backbone():
    pts = np.array([[0.0, 0.0], [0.5, 0.0]])
    assert not validate_family(pts, CurveFamilyParams("backbone", c1=1.0, c2=2.0)).ok


def test_koch_level_three_is_four_bounded():
    params = CurveFamilyParams("kappa-bounded", kappa=4.0, seed=5)
    pts = gen_curve(params, 65)
    rep = validate_family(pts, params)
    assert rep.ok, rep.worst_ratio


@pytest.mark.parametrize("kappa", [3.0, 6.0, 20.0, 40.0])
def test_spiral_is_kappa_packed(kappa):
    params = CurveFamilyParams("kappa-packed", kappa=kappa, seed=int(kappa))
    pts = gen_curve(params, 400)
    rep = validate_family(pts, params)
    assert rep.ok, rep.worst_ratio


def test_spiral_in_three_dimensions():
    params = CurveFamilyParams("kappa-packed", seed=2, dim=3)
    pts = gen_curve(params, 200)
    assert pts.shape == (200, 3)
    assert validate_family(pts, params).ok


@given(st.integers(0, 2**63 - 1), st.integers(2, 300))
def test_backbone_always_validates(seed, n):
    params = CurveFamilyParams("backbone", seed=seed)
    pts = gen_curve(params, n)
    assert len(pts) == n
    assert validate_family(pts, params).ok


@given(st.integers(0, 2**32), st.floats(1.01, 2.5))
def test_backbone_tight_steps_validate(seed, c):
    params = CurveFamilyParams("backbone", c1=c, c2=c, seed=seed)
    pts = gen_curve(params, 120)
    assert validate_family(pts, params).ok


def test_ball_length_of_segment():
    seg = np.array([[-2.0, 0.0], [2.0, 0.0]])
    assert math.isclose(polyline_length_in_ball(seg, np.zeros(2), 1.0), 2.0)
    assert polyline_length_in_ball(seg, np.array([0.0, 5.0]), 1.0) == 0.0


@pytest.mark.parametrize("family", [f.value for f in Family])
def test_gen_pair_deterministic(family):
    a = gen_pair(family, 80, 7)
    b = gen_pair(family, 80, 7)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert a[0].shape[1] == a[1].shape[1] == 2
