import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isocluster.errors import SplitError
from isocluster.geometry import Ball
from isocluster.split import (
    bruteforce_partition,
    frame_of,
    greedy_partition,
    partition_objective,
    split_bruteforce,
    split_greedy,
)

from helpers import p1, p2, random_point
from oracles import deviation_sum


def values(group):
    return sorted(float(p.to_dense(1)[0]) for p in group)


def test_five_point_both_splits():
    pts = [p1(x) for x in (0, 4, 5, 9, 13)]
    for split in (split_greedy, split_bruteforce):
        left, right = split(pts)
        assert sorted([values(left), values(right)]) == [[0, 4, 5], [9, 13]]


def test_five_point_objectives():
    frame = frame_of([p1(x) for x in (0, 4, 5, 9, 13)])
    obj, _ = partition_objective(frame, [0, 1, 2], [3, 4])
    alt, _ = partition_objective(frame, [0, 1], [2, 3, 4])
    assert obj == pytest.approx(10.25)
    assert alt == pytest.approx(20.0)
    assert deviation_sum([[0, 4, 5], [9, 13]]) < deviation_sum([[0, 4], [5, 9, 13]])


def test_two_points_and_errors():
    a, b = p2(0, 0), p2(1, 1)
    assert split_greedy([a, b]) == ([a], [b])
    assert split_bruteforce([a, b]) == ([a], [b])
    with pytest.raises(SplitError):
        split_greedy([a])
    with pytest.raises(SplitError):
        split_bruteforce([a])
    with pytest.raises(SplitError):
        split_bruteforce([p1(x) for x in range(1, 15)], cutoff=12)


def test_clustered_pairs():
    pts = [p2(0, 0), p2(10, 0), p2(0.1, 0), p2(10.1, 0)]
    for split in (split_greedy, split_bruteforce):
        left, right = split(pts)
        xs = sorted([sorted(float(p.to_dense(2)[0]) for p in g) for g in (left, right)])
        assert xs == [[0.0, 0.1], [10.0, 10.1]]


def test_ball_entries():
    balls = [Ball(p2(0, 0), 1), Ball(p2(1, 0), 1), Ball(p2(20, 0), 2), Ball(p2(22, 1), 1)]
    left, right = split_greedy(balls)
    assert {id(b) for b in left} in ({id(balls[0]), id(balls[1])}, {id(balls[2]), id(balls[3])})


def _bruteforce_all(frame):
    """Every bipartition, for checking the restricted search."""
    n = len(frame)
    best = None
    for mask in range(1, (1 << n) - 1):
        if mask & 1 == 0:
            continue
        left = [i for i in range(n) if mask >> i & 1]
        right = [i for i in range(n) if not mask >> i & 1]
        obj, _ = partition_objective(frame, left, right)
        best = obj if best is None else min(best, obj)
    return best


@settings(max_examples=40)
@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=3, max_size=9, unique=True))
def test_bruteforce_dominates_greedy(coords):
    pts = [p2(x, y) for x, y in coords]
    frame = frame_of(pts)
    if np.any(frame.D2[np.triu_indices(len(pts), 1)] == 0):
        return
    a, b = frame.farthest_pair()
    bl, br = bruteforce_partition(frame, 12)
    gl, gr = greedy_partition(frame)
    assert (a in bl) != (b in bl)
    assert (a in gl) != (b in gl)
    ob, _ = partition_objective(frame, bl, br)
    og, _ = partition_objective(frame, gl, gr)
    assert ob <= og
    assert sorted(bl + br) == list(range(len(pts)))


def test_restricted_search_is_near_global(rng):
    # the exhaustive search only ranks partitions that separate the
    # farthest pair; the best such partition is rarely worse than the
    # unrestricted optimum
    worse = 0
    for _ in range(30):
        pts = [p2(*rng.normal(size=2)) for _ in range(7)]
        frame = frame_of(pts)
        ob, _ = partition_objective(frame, *bruteforce_partition(frame, 12))
        worse += ob > _bruteforce_all(frame) * 1.25
    assert worse <= 3


def test_sparse_entries_partition(rng):
    pts = [random_point(rng, dim=200, nnz=12) for _ in range(11)]
    left, right = split_bruteforce(pts)
    assert len(left) + len(right) == 11 and left and right


@pytest.mark.parametrize("min_fill", [2, 3, 4])
def test_min_fill_respected(rng, min_fill):
    for _ in range(20):
        pts = [random_point(rng, dim=64, nnz=6) for _ in range(9)]
        for left, right in (split_greedy(pts, min_fill), split_bruteforce(pts, 12, min_fill)):
            assert len(left) >= min_fill and len(right) >= min_fill
            assert len(left) + len(right) == 9


def test_min_fill_bruteforce_dominates_greedy(rng):
    for _ in range(30):
        frame = frame_of([random_point(rng, dim=64, nnz=6) for _ in range(10)])
        ob, _ = partition_objective(frame, *bruteforce_partition(frame, 12, 3))
        og, _ = partition_objective(frame, *greedy_partition(frame, 3))
        assert ob <= og


def test_min_fill_impossible():
    with pytest.raises(SplitError):
        split_greedy([p1(1), p1(2), p1(3)], min_fill=2)
