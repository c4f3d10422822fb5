import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isocluster.errors import DimensionError, InvalidPointError
from isocluster.sparse_point import (
    EMPTY,
    SparsePoint,
    add,
    axpby,
    dist,
    dist2,
    dot,
    get,
    merge_add,
    norm2,
    scale,
    sub,
)

from helpers import random_point

DIM = 64


def sp(*pairs):
    return SparsePoint.from_pairs(pairs)


@st.composite
def points(draw, dim=DIM, max_nnz=12):
    keys = draw(st.lists(st.integers(0, dim - 1), max_size=max_nnz, unique=True))
    vals = draw(
        st.lists(
            st.floats(-1e3, 1e3, allow_nan=False).filter(lambda v: v != 0.0),
            min_size=len(keys),
            max_size=len(keys),
        )
    )
    return SparsePoint.from_pairs(zip(keys, vals))


def test_get_examples():
    p = sp((3, 1.5))
    assert get(p, 3) == 1.5
    assert get(p, 0) == 0.0
    assert get(EMPTY, 7) == 0.0
    assert p[3] == 1.5


def test_get_rejects_out_of_range():
    with pytest.raises(DimensionError):
        get(sp((3, 1.5)), 10, dim=10)
    with pytest.raises(DimensionError):
        get(EMPTY, -1)


def test_add_examples():
    assert add(sp((0, 1), (2, 3)), sp((1, 5))) == sp((0, 1), (1, 5), (2, 3))
    assert add(sp((2, 3)), sp((2, -3))) == EMPTY
    assert add(sp((2, 3)), sp((2, -3))).nnz == 0
    assert add(sp((0, 1), (5, 2)), sp((0, 2), (5, 2))) == sp((0, 3), (5, 4))


def test_scale_examples():
    assert scale(sp((1, 2)), 0.5) == sp((1, 1))
    assert scale(sp((1, 2)), 0) == EMPTY
    assert scale(sp((0, 3), (9, -6)), -1) == sp((0, -3), (9, 6))
    with pytest.raises(InvalidPointError):
        scale(sp((1, 2)), math.inf)


def test_norm_dot_dist_examples():
    assert norm2(sp((0, 3), (1, 4))) == 25
    assert norm2(EMPTY) == 0
    assert dot(sp((0, 1)), sp((1, 1))) == 0
    assert dot(sp((2, 3)), sp((2, 4))) == 12
    assert dist(EMPTY, sp((0, 3), (1, 4))) == 5
    a = sp((4, 2.5), (8, -1))
    assert dist(a, a) == 0


def test_validation():
    with pytest.raises(InvalidPointError):
        SparsePoint([3, 1], [1.0, 2.0])
    with pytest.raises(InvalidPointError):
        SparsePoint([1, 1], [1.0, 2.0])
    with pytest.raises(InvalidPointError):
        SparsePoint([1], [0.0])
    with pytest.raises(InvalidPointError):
        SparsePoint([-1], [1.0])
    with pytest.raises(InvalidPointError):
        SparsePoint([1], [math.nan])
    with pytest.raises(InvalidPointError):
        sp((1, 1.0), (1, 2.0))


def test_immutable():
    p = sp((1, 2.0))
    with pytest.raises(ValueError):
        p.vals[0] = 3.0


def test_random_against_dense(rng):
    for _ in range(50):
        a = random_point(rng)
        b = random_point(rng)
        da, db = a.to_dense(1024), b.to_dense(1024)
        assert math.isclose(norm2(a), float(da @ da), rel_tol=1e-12)
        assert math.isclose(dot(a, b), float(da @ db), rel_tol=1e-12, abs_tol=1e-12)
        assert math.isclose(dist(a, b), float(np.linalg.norm(da - db)), rel_tol=1e-12)
        np.testing.assert_allclose(add(a, b).to_dense(1024), da + db, rtol=1e-15)
        np.testing.assert_allclose(axpby(0.3, a, -1.7, b).to_dense(1024), 0.3 * da - 1.7 * db, rtol=1e-14)


def test_merge_add_is_linear():
    a = SparsePoint(np.arange(0, 40, 2), np.ones(20))
    b = SparsePoint(np.arange(1, 41, 4), np.ones(10))
    steps = [0]
    assert merge_add(a, b, steps) == add(a, b)
    assert steps[0] <= a.nnz + b.nnz


@given(points(), points())
def test_add_matches_dense(a, b):
    np.testing.assert_array_equal(add(a, b).to_dense(DIM), a.to_dense(DIM) + b.to_dense(DIM))
    assert add(a, b) == merge_add(a, b)


@given(points(), points())
def test_no_explicit_zeros(a, b):
    c = sub(a, b)
    assert not np.any(c.vals == 0.0)
    assert np.all(np.diff(c.keys) > 0)
    assert sub(a, a) == EMPTY


@given(points(), points(), points())
def test_triangle_inequality(a, b, c):
    assert dist(a, c) <= dist(a, b) + dist(b, c) + 1e-9 * (1 + dist(a, c))


@given(points(), points())
def test_dist_symmetric_and_consistent(a, b):
    assert dist2(a, b) == dist2(b, a)
    assert dist2(a, b) == pytest.approx(sub(a, b).norm2(), rel=1e-12, abs=1e-12)


@given(points())
def test_hash_and_equality(a):
    b = SparsePoint(a.keys.copy(), a.vals.copy())
    assert a == b and hash(a) == hash(b)
