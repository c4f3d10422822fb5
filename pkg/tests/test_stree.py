import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isocluster.errors import DimensionError, SplitError
from isocluster.geometry import Ball
from isocluster.sparse_point import EMPTY, SparsePoint, dist
from isocluster.stats import StatSummary
from isocluster.stree import Node, STree, TreeConfig, redistribute_children, select_subnode

from helpers import p1, p2, random_point
from oracles import batch_summary, scan_dists, scan_knn

FIVE = (0, 4, 5, 9, 13)


def five_tree(**kw):
    t = STree(dim=1, capacity=4, **kw)
    t.extend(p1(x) for x in FIVE)
    return t


def xs(points):
    return sorted(float(p.to_dense(1)[0]) for p in points)


def test_config_validation():
    with pytest.raises(ValueError):
        TreeConfig(capacity=3)
    with pytest.raises(ValueError):
        TreeConfig(split_mode="nope")
    with pytest.raises(ValueError):
        TreeConfig(capacity=16, split_mode="brute", brute_cutoff=12)
    assert TreeConfig(capacity=8, split_mode="brute").split_mode == "bruteforce"


def test_insert_into_empty():
    t = STree(dim=4)
    p = SparsePoint([1], [2.0])
    t.insert(p)
    assert t.root.leaf and t.root.entries == [p]
    assert t.root.ball == Ball(p, 0.0)
    assert t.root.stats.n == 1
    with pytest.raises(DimensionError):
        t.insert(SparsePoint([4], [1.0]))


@pytest.mark.parametrize("mode", ["greedy", "brute", "auto"])
def test_five_point_split(mode):
    t = five_tree(split_mode=mode)
    assert t.height == 2
    assert sorted(xs(leaf.entries) for leaf in t.leaves()) == [[0, 4, 5], [9, 13]]
    assert t.audit().ok


def test_select_subnode_examples():
    kids = [Ball(p2(0, 0), 1.0), Ball(p2(10, 0), 1.0)]
    assert select_subnode(p2(3, 0), kids) == 0
    three = [Ball(p2(0, 0), 1.0), Ball(p2(10, 0), 1.0), Ball(p2(5, 5), 2.0)]
    assert select_subnode(p2(5, 6), three) == 2
    overlap = [(Ball(p2(0, 0), 3.0), StatSummary()), (Ball(p2(4, 0), 3.0), StatSummary())]
    assert select_subnode(p2(2, 0), overlap) == 0
    assert select_subnode(p2(2.5, 0), overlap) == 1
    with pytest.raises(ValueError):
        select_subnode(p2(0, 0), [])


def _leaf(points):
    from isocluster.stree import _leaf_from

    return _leaf_from(points)


def test_redistribute_examples():
    straddler = _leaf([p2(1, 0), p2(3, 0)])
    left_only = _leaf([p2(-1, 0), p2(-1, 1)])
    parent = Node(False, [straddler, left_only], Ball(p2(1, 0), 3.0), StatSummary())
    n1, n2 = redistribute_children(parent, Ball(p2(0, 0), 1.0), Ball(p2(4, 0), 1.0))
    assert left_only in n1.entries
    first = [p for c in n1.entries for p in c.entries]
    second = [p for c in n2.entries for p in c.entries]
    assert p2(1, 0) in first and p2(3, 0) in second
    assert len(first) == 3 and len(second) == 1
    with pytest.raises(SplitError):
        redistribute_children(straddler, Ball(p2(0, 0), 1.0), Ball(p2(4, 0), 1.0))


def test_redistribute_recursive_subtree(rng):
    t = STree(dim=2, capacity=4)
    t.extend(p2(*x) for x in rng.uniform(-10, 10, size=(200, 2)))
    assert t.height >= 3
    root = t.root
    n1, n2 = redistribute_children(root, Ball(p2(-5, 0), 5.0), Ball(p2(5, 0), 5.0))
    t.root = Node(False, [n1, n2], root.ball, root.stats)
    assert n1.stats.n + n2.stats.n == 200
    for p in n1.points():
        assert p.to_dense(2)[0] <= 0.0
    for p in n2.points():
        assert p.to_dense(2)[0] > 0.0
    report = t.audit()
    assert all("entries outside" in v for v in report.violations), report.violations


def test_knn_examples():
    t = five_tree()
    res = t.query_knn(p1(6), 2)
    assert [(xs([p])[0], d) for p, d in res] == [(5.0, 1.0), (4.0, 2.0)]
    assert STree(dim=1).query_knn(p1(6), 3) == []
    with pytest.raises(ValueError):
        t.query_knn(p1(6), 0)
    assert len(t.query_knn(p1(6), 50)) == 5


def test_query_ball_examples():
    t = five_tree()
    assert xs(t.query_ball(p1(4.5), 1.0)) == [4, 5]
    t.insert(p1(4))
    assert xs(t.query_ball(p1(4), 0.0)) == [4, 4]
    assert t.query_ball(p1(100), 1.0) == []
    assert t.query_ball(EMPTY, 0.0) == [EMPTY]


def test_browse():
    t = five_tree()
    top = t.browse(p1(6), 0)
    assert sorted(s.n for _, s in top) == [2, 3]
    assert sum(s.n for _, s in top) == t.root.stats.n
    bottom = t.browse(p1(1), t.height)
    assert all(b.radius == 0.0 and s.n == 1 for b, s in bottom)
    assert xs([b.center for b, _ in bottom]) == [0, 4, 5]
    with pytest.raises(ValueError):
        t.browse(p1(1), t.height + 1)
    assert STree(dim=1).browse(p1(0), 0) == []


def test_browse_sums_match_parents(rng):
    t = STree(dim=64, capacity=5)
    t.extend(random_point(rng, dim=64, nnz=6) for _ in range(300))
    q = random_point(rng, dim=64, nnz=6)
    for depth in range(t.height):
        level = t.browse(q, depth)
        parent_n = t.browse(q, depth - 1) if depth else [(None, t.root.stats)]
        assert sum(s.n for _, s in level) in {s.n for _, s in parent_n}


def test_delete_examples():
    t = five_tree()
    assert t.delete_ball(p1(4.5), 1.0) == 2
    assert xs(t) == [0, 9, 13]
    n, mean, sumsq = batch_summary([p1(0), p1(9), p1(13)], 1)
    assert t.root.stats.n == n
    assert t.root.stats.mean.to_dense(1)[0] == pytest.approx(mean[0])
    assert t.root.stats.sumsq == pytest.approx(sumsq)
    assert t.audit().ok
    assert t.delete_ball(p1(7), 0.0) == 0
    assert len(t) == 3
    assert t.delete_ball(p1(6), 100.0) == 3
    assert len(t) == 0 and t.root is None
    assert t.audit().ok


def test_audit_reports_corruption():
    t = five_tree()
    assert str(t.audit()) == "0 violations"
    leaf = t.leaves()[0]
    leaf.ball = Ball(leaf.ball.center, leaf.ball.radius * 0.5)
    report = t.audit()
    assert not report.ok
    assert any("outside ancestor ball" in v for v in report.violations)


def test_update_count_bounded_by_height(rng):
    t = STree(dim=1024)
    for _ in range(1500):
        t.insert(random_point(rng))
        assert t.last_insert_updates <= t.height


@pytest.mark.parametrize("mode", ["greedy", "brute", "auto"])
def test_modes_build_valid_trees(rng, mode):
    cap = 8 if mode == "brute" else 10
    t = STree(dim=128, capacity=cap, split_mode=mode)
    pts = [random_point(rng, dim=128, nnz=8) for _ in range(600)]
    t.extend(pts)
    assert t.audit().ok
    q = pts[17]
    got = t.query_knn(q, 4)
    want = scan_knn(pts, q, 4, 128)
    np.testing.assert_allclose([d for _, d in got], [d for _, d in want], rtol=1e-12, atol=1e-12)


def test_random_queries_match_scan(rng):
    pts = [random_point(rng, dim=256, nnz=16) for _ in range(1500)]
    t = STree(dim=256, capacity=12)
    t.extend(pts)
    for _ in range(25):
        q = random_point(rng, dim=256, nnz=16)
        got = t.query_knn(q, 7)
        d = scan_dists(pts, q, 256)
        kth = np.sort(d)[6]
        np.testing.assert_allclose([x for _, x in got], np.sort(d)[:7], rtol=1e-12)
        assert got[-1][1] == pytest.approx(kth, rel=1e-12)
        r = got[-1][1]
        ball = t.query_ball(q, r)
        want = sorted((dist(p, q), p.sort_key()) for p in pts if dist(p, q) <= r)
        assert [(dist(p, q), p.sort_key()) for p in ball] == want


def test_duplicates(rng):
    p = random_point(rng, dim=32, nnz=4)
    t = STree(dim=32, capacity=4)
    t.extend([p] * 30)
    assert t.audit().ok
    assert len(t.query_ball(p, 0.0)) == 30
    assert t.delete_ball(p, 0.0) == 30


ops = st.lists(
    st.tuples(
        st.sampled_from(["ins", "ins", "ins", "del"]),
        st.floats(-20, 20),
        st.floats(-20, 20),
        st.floats(0, 4),
    ),
    min_size=1,
    max_size=120,
)


@settings(max_examples=40)
@given(ops)
def test_random_workload_keeps_invariants(workload):
    t = STree(dim=2, capacity=4)
    stored: list[SparsePoint] = []
    for op, x, y, r in workload:
        q = p2(x, y)
        if op == "ins":
            t.insert(q)
            stored.append(q)
        else:
            gone = t.delete_ball(q, r)
            keep = [p for p in stored if dist(p, q) > r]
            assert gone == len(stored) - len(keep)
            stored = keep
    assert t.audit().ok, t.audit().violations
    assert sorted(map(SparsePoint.sort_key, t)) == sorted(map(SparsePoint.sort_key, stored))
    if stored:
        q = p2(0.5, -0.5)
        got = t.query_knn(q, 3)
        want = sorted(dist(p, q) for p in stored)[:3]
        assert [d for _, d in got] == want
