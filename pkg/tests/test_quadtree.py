import math

import numpy as np
import pytest

from conftest import FAMILIES, cached_pair
from oracles import omega
from trajdist.errors import ParamError
from trajdist.frechet import dtw_bounds
from trajdist.quadtree import (
    QuadNode,
    build_active_tree,
    build_pair_family,
    node_dist,
    pairing_factor,
    scales,
)


def _box(lo, side):
    return QuadNode(np.asarray(lo, float), float(side), 0, np.array([]), np.array([]))


def test_node_dist_examples():
    assert node_dist(_box((0, 0), 1), _box((0, 0), 1)) == 0.0
    assert node_dist(_box((0, 0), 1), _box((3, 0), 1)) == 2.0
    assert node_dist(_box((0, 0), 1), _box((1, 1), 1)) == 0.0
    assert node_dist(_box((0, 0), 1), _box((4, 5), 1)) == 5.0


def test_scales_are_powers_of_two():
    r_low, r_high = scales(0.25, 3.0, 3.0 * 400, 100, 2)
    for r in (r_low, r_high):
        assert math.frexp(r)[0] == 0.5
    assert r_low <= pairing_factor(0.25, 2) * 3.0 / 200 <= 2 * r_low
    assert r_high <= 4 * 1200 <= 2 * r_high


def test_tree_single_points():
    tree = build_active_tree([[0.2, 0.3]], [[5.7, 0.1]], 1.0, 1.0)
    assert tree.levels == 1
    assert tree.num_nodes == 2
    tree = build_active_tree([[0.2, 0.3]], [[0.7, 0.1]], 1.0, 1.0)
    assert tree.num_nodes == 1


def test_tree_rejects_bad_scales():
    with pytest.raises(ParamError):
        build_active_tree([[0.0, 0.0]], [[1.0, 1.0]], 2.0, 1.0)
    with pytest.raises(ParamError):
        build_active_tree([[0.0, 0.0]], [[1.0, 1.0]], 1.0, 3.0)


def test_identical_sequences_give_balanced_nodes(rng):
    P = rng.uniform(0, 10, size=(60, 2))
    tree = build_active_tree(P, P.copy(), 0.125, 8.0)
    for v in range(tree.num_nodes):
        node = tree.node(v)
        assert np.array_equal(node.p_indices, node.q_indices)


def test_membership_brute_force(rng):
    P = rng.uniform(-5, 7, size=(50, 2))
    Q = rng.uniform(-3, 9, size=(40, 2))
    tree = build_active_tree(P, Q, 0.25, 16.0)
    for seq, attr in ((P, "p_indices"), (Q, "q_indices")):
        for level in range(tree.levels):
            side = 0.25 * 2 ** level
            owners = {}
            for v in np.flatnonzero(tree.level == level):
                node = tree.node(int(v))
                assert node.side == side
                for idx in getattr(node, attr):
                    assert idx not in owners
                    owners[int(idx)] = node
            assert sorted(owners) == list(range(1, len(seq) + 1))
            for idx, node in owners.items():
                x = seq[idx - 1]
                assert np.all(node.box_min <= x) and np.all(x < node.box_min + side)
                # box recomputed by floor division from the anchor
                cell = np.floor((x - tree.anchor) / side)
                assert np.array_equal(tree.anchor + cell * side, node.box_min)
    assert np.all(np.mod(tree.anchor, 16.0) == 0)


def _family(P, Q, eps):
    b = dtw_bounds(P, Q)
    n = max(len(P), len(Q))
    r_low, r_high = scales(eps, b.lower, b.upper, n, P.shape[1])
    tree = build_active_tree(P, Q, r_low, r_high)
    return build_pair_family(tree, eps, b.lower, b.upper, n), b


def test_single_point_pair_is_covered():
    P, Q = np.array([[0.0, 0.0]]), np.array([[7.0, 1.0]])
    fam, _ = _family(P, Q, 0.5)
    assert len(fam) >= 1
    hits = [(u, v) for u, v in zip(fam.u, fam.v)
            if 1 in fam.tree.node(int(u)).p_indices and 1 in fam.tree.node(int(v)).q_indices]
    assert len(hits) == 1


@pytest.mark.parametrize("seed", range(9))
def test_pair_family_properties(seed):
    P, Q = cached_pair(FAMILIES[seed % 3], 64, 900 + seed)
    eps = (0.1, 0.25, 0.5)[seed % 3]
    fam, b = _family(P, Q, eps)
    tree = fam.tree
    n = max(len(P), len(Q))
    dsq = fam.dsq()
    su = np.array([tree.side(int(u)) for u in fam.u])
    sv = np.array([tree.side(int(v)) for v in fam.v])
    # side bound with the eps/16 constant
    assert np.all(np.maximum(su, sv) <= eps / 16 * np.maximum(dsq, b.lower / (2 * n)))
    # sides within a factor 2
    assert np.all((su / 2 <= sv) & (sv <= 2 * su))
    # no pair is coarser than the parent of either node
    top = tree.levels - 1
    pu = np.where(tree.level[fam.u] < top, 2 * su, np.inf)
    pv = np.where(tree.level[fam.v] < top, 2 * sv, np.inf)
    assert np.all(np.maximum(su, sv) <= np.minimum(pu, pv))
    # every close pair is covered exactly once
    cov = np.zeros((len(Q), len(P)), dtype=int)
    for u, v in zip(fam.u, fam.v):
        pi = tree.node(int(u)).p_indices - 1
        qj = tree.node(int(v)).q_indices - 1
        cov[np.ix_(qj, pi)] += 1
    assert cov.max() <= 1
    assert np.all(cov[omega(P, Q) <= b.upper] == 1)
