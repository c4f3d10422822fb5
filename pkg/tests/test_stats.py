import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isocluster.errors import EmptySummaryError, StatsUnderflowError
from isocluster.sparse_point import SparsePoint
from isocluster.stats import EMPTY_SUMMARY, StatSummary, deviation, exclude, include, merge, subtract

from helpers import p1, random_point
from oracles import batch_deviation, batch_summary


def summary(xs):
    return StatSummary.of(p1(x) for x in xs)


def test_include_first_point():
    p = SparsePoint([2, 5], [1.0, -2.0])
    s = include(EMPTY_SUMMARY, p)
    assert (s.n, s.mean, s.sumsq) == (1, p, 5.0)


def test_include_1d():
    s = summary([0, 4, 5])
    assert s.n == 3
    assert s.mean.to_dense(1)[0] == pytest.approx(3.0)
    assert s.sumsq == 41.0


def test_exclude():
    p = p1(2.5)
    assert exclude(include(EMPTY_SUMMARY, p), p) == EMPTY_SUMMARY
    s = exclude(summary([0, 4, 5]), p1(5))
    assert s.n == 2
    assert s.mean.to_dense(1)[0] == pytest.approx(2.0)
    assert s.sumsq == pytest.approx(16.0)
    with pytest.raises(StatsUnderflowError):
        exclude(EMPTY_SUMMARY, p)


def test_deviation_examples():
    assert deviation(summary([7])) == 0.0
    assert deviation(summary([9, 13])) == pytest.approx(2.0)
    assert deviation(summary([0, 4, 5])) == pytest.approx(math.sqrt(14 / 3))
    with pytest.raises(EmptySummaryError):
        deviation(EMPTY_SUMMARY)


def test_merge_examples():
    s = summary([0, 4, 5])
    assert merge(s, EMPTY_SUMMARY) == s
    assert merge(EMPTY_SUMMARY, s) == s
    m = merge(s, summary([9, 13]))
    assert m.n == 5
    assert m.mean.to_dense(1)[0] == pytest.approx(6.2)
    assert m.sumsq == pytest.approx(291.0)


def test_subtract_inverts_merge():
    a, b = summary([0, 4, 5]), summary([9, 13])
    back = subtract(merge(a, b), b)
    assert back.n == 3
    assert back.mean.to_dense(1)[0] == pytest.approx(3.0)
    assert back.sumsq == pytest.approx(41.0)


def test_random_against_batch(rng):
    pts = [random_point(rng) for _ in range(2000)]
    s = StatSummary.of(pts)
    n, mean, sumsq = batch_summary(pts, 1024)
    assert s.n == n
    np.testing.assert_allclose(s.mean.to_dense(1024), mean, rtol=1e-9, atol=1e-12)
    assert s.sumsq == pytest.approx(sumsq, rel=1e-12)
    X = np.array([p.to_dense(1024) for p in pts])
    assert s.deviation() == pytest.approx(batch_deviation(X), rel=1e-9)


values = st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=20)


@given(values, values)
def test_merge_commutes(xs, ys):
    a, b = summary(xs), summary(ys)
    m1, m2 = merge(a, b), merge(b, a)
    assert m1.n == m2.n
    assert m1.sumsq == pytest.approx(m2.sumsq, rel=1e-9, abs=1e-9)
    np.testing.assert_allclose(m1.mean.to_dense(1), m2.mean.to_dense(1), rtol=1e-9, atol=1e-9)


@given(values)
def test_deviation_matches_batch(xs):
    assert deviation(summary(xs)) == pytest.approx(batch_deviation(xs), rel=1e-6, abs=1e-5)
