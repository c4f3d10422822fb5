"""Balanced hierarchical index whose nodes are bounded by balls.

Points enter at the root and descend one level at a time.  Every node on
the way folds the point into its running statistics and grows its ball
just enough to cover it.  A node that overflows is split in two at its
own level, and a root split adds a level, so all leaves stay at the same
depth as in a B-tree.  When an inner node splits, children lying wholly on
one side of the border plane between the two new balls move intact.
Children cut by the plane are split along it recursively.
"""

from __future__ import annotations

import bisect
import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from . import _kernels as _k
from . import split as _split
from .errors import DimensionError, SplitError
from .geometry import GEOM_EPS, Ball, EntryFrame, expand_ball, tolerance
from .sparse_point import SparsePoint, check_dim, csr, dist, dot, sub
from .stats import EMPTY_SUMMARY, StatSummary, include, merge

log = logging.getLogger(__name__)

SPLIT_MODES = ("greedy", "bruteforce", "auto")


@dataclass
class TreeConfig:
    dim: int = 1024
    capacity: int = 16
    split_mode: str = "auto"
    brute_cutoff: int = 12
    geom_eps: float = GEOM_EPS
    # smallest group a split may produce; None picks ~30% of a full node
    min_fill: Optional[int] = None

    def __post_init__(self):
        if self.split_mode == "brute":
            self.split_mode = "bruteforce"
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.capacity < 4:
            raise ValueError("capacity must be at least 4")
        if self.split_mode not in SPLIT_MODES:
            raise ValueError(f"split_mode must be one of {SPLIT_MODES}")
        if not 2 <= self.brute_cutoff <= _split.MAX_BRUTE_CUTOFF:
            raise ValueError(f"brute_cutoff must be in [2, {_split.MAX_BRUTE_CUTOFF}]")
        if self.split_mode == "bruteforce" and self.capacity + 1 > self.brute_cutoff:
            raise ValueError("bruteforce splitting needs capacity + 1 <= brute_cutoff")
        if not self.geom_eps > 0:
            raise ValueError("geom_eps must be positive")
        if self.min_fill is None:
            self.min_fill = max(2, 3 * (self.capacity + 1) // 10)
        if not 1 <= self.min_fill <= (self.capacity + 1) // 2:
            raise ValueError("min_fill must be in [1, (capacity + 1) // 2]")


class Node:
    """Leaf (``entries`` are points) or inner node (``entries`` are nodes)."""

    __slots__ = ("leaf", "entries", "ball", "stats", "_block")

    def __init__(self, leaf: bool, entries: list, ball: Ball, stats: StatSummary):
        self.leaf = leaf
        self.entries = entries
        self.ball = ball
        self.stats = stats
        self._block = None

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self) -> str:
        kind = "Leaf" if self.leaf else "Inner"
        return f"<{kind} n={self.stats.n} entries={len(self.entries)} r={self.ball.radius:.4g}>"

    def summaries(self) -> list[tuple[Ball, StatSummary]]:
        if self.leaf:
            return [(Ball(p, 0.0), StatSummary(1, p, p.norm2())) for p in self.entries]
        return [(c.ball, c.stats) for c in self.entries]

    def points(self) -> Iterator[SparsePoint]:
        if self.leaf:
            yield from self.entries
        else:
            for c in self.entries:
                yield from c.points()

    def invalidate(self) -> None:
        self._block = None

    def block(self):
        """Entry centers stacked as CSR, with entry radii and the centers."""
        if self._block is None:
            centers = self.entries if self.leaf else [c.ball.center for c in self.entries]
            indptr, keys, vals = csr(centers)
            if self.leaf:
                radii = np.zeros(len(centers))
            else:
                radii = np.fromiter((c.ball.radius for c in self.entries), dtype=np.float64, count=len(centers))
            self._block = (indptr, keys, vals, radii, centers)
        return self._block


def _block_dots(block, q: SparsePoint) -> np.ndarray:
    return _k.block_dot(block[0], block[1], block[2], q.keys, q.vals)


def _block_dists(block, q: SparsePoint) -> np.ndarray:
    """Distances from ``q`` to every entry center of a node; each equals
    ``dist(q, center)`` exactly."""
    return np.sqrt(_k.block_dist2(block[0], block[1], block[2], q.keys, q.vals))


def _merged(summaries) -> StatSummary:
    acc = EMPTY_SUMMARY
    for s in summaries:
        acc = merge(acc, s)
    return acc


def choose_subnode(d: np.ndarray, radii: np.ndarray) -> int:
    """Pick a child from center distances and radii.

    Inside one or more balls: the smallest power ``d^2 - R^2``, which is
    the child winning every pairwise border-plane test.  Outside all of
    them: the least growth ``T = 4RH + H^2`` of the squared radius, then
    the smaller grown radius, then the lower index.
    """
    return int(_k.choose_child(np.asarray(d, dtype=np.float64), np.asarray(radii, dtype=np.float64)))


def select_subnode(q: SparsePoint, children: Sequence) -> int:
    """Index of the child ball ``q`` should descend into.

    ``children`` holds ``Ball`` objects or ``(Ball, StatSummary)`` pairs.
    """
    if not children:
        raise ValueError("no children to select from")
    balls = [c[0] if isinstance(c, tuple) else c for c in children]
    d = np.array([dist(q, b.center) for b in balls])
    radii = np.array([b.radius for b in balls])
    return choose_subnode(d, radii)


class _Plane:
    """Border plane between two balls, ``f(x) = -2 x.v + c``."""

    def __init__(self, b1: Ball, b2: Ball):
        self.v = sub(b1.center, b2.center)
        if self.v.nnz == 0:
            raise SplitError("border plane of concentric balls is undefined")
        self.c = b1.center.norm2() - b2.center.norm2() - b1.radius**2 + b2.radius**2
        self.norm = 2.0 * math.sqrt(self.v.norm2())

    def values(self, node: Node) -> np.ndarray:
        return self.c - 2.0 * _block_dots(node.block(), self.v)

    def ball_side(self, ball: Ball, eps: float) -> int:
        """-1 / +1 if the ball lies strictly on one side, else 0."""
        offset = (self.c - 2.0 * dot(ball.center, self.v)) / self.norm
        margin = ball.radius + tolerance(ball.radius, eps)
        if offset < -margin:
            return -1
        if offset > margin:
            return 1
        return 0

    def sides(self, node: Node, eps: float) -> tuple[bool, bool]:
        """Whether the subtree has points on the first / second side."""
        s = self.ball_side(node.ball, eps)
        if s:
            return s < 0, s > 0
        if node.leaf:
            f = self.values(node)
            return bool(np.any(f <= 0.0)), bool(np.any(f > 0.0))
        first = second = False
        for c in node.entries:
            a, b = self.sides(c, eps)
            first |= a
            second |= b
            if first and second:
                break
        return first, second


def _leaf_from(points: list[SparsePoint], ball: Optional[Ball] = None) -> Node:
    if ball is None:
        frame = EntryFrame(points)
        w, R, _ = frame.quasi_balls(np.ones((1, len(points)), dtype=bool))
        ball = frame.ball_of(w[0], R[0])
    return Node(True, points, ball, StatSummary.of(points))


def _inner_from(children: list[Node], ball: Optional[Ball] = None) -> Node:
    if ball is None:
        if len(children) == 1:
            ball = children[0].ball
        else:
            frame = EntryFrame([c.ball.center for c in children], [c.ball.radius for c in children])
            w, R, _ = frame.quasi_balls(np.ones((1, len(children)), dtype=bool), shrink=False)
            ball = frame.ball_of(w[0], R[0])
    stats = EMPTY_SUMMARY
    for c in children:
        stats = merge(stats, c.stats)
    return Node(False, children, ball, stats)


def _cut(node: Node, plane: _Plane, eps: float) -> tuple[Node, Node]:
    """Split a subtree along ``plane``; both halves keep the node's depth."""
    if node.leaf:
        f = plane.values(node)
        first = [p for p, v in zip(node.entries, f) if v <= 0.0]
        second = [p for p, v in zip(node.entries, f) if v > 0.0]
        return _leaf_from(first), _leaf_from(second)
    first, second = [], []
    for c in node.entries:
        a, b = plane.sides(c, eps)
        if a and b:
            h1, h2 = _cut(c, plane, eps)
            first.append(h1)
            second.append(h2)
        elif a:
            first.append(c)
        else:
            second.append(c)
    return _inner_from(first), _inner_from(second)


def redistribute_children(parent: Node, b1: Ball, b2: Ball, eps: float = GEOM_EPS) -> tuple[Node, Node]:
    """Partition an inner node's children by the border plane of two balls.

    Children wholly on one side move intact; children cut by the plane are
    split along it recursively and contribute one half to each side.
    """
    if parent.leaf:
        raise SplitError("redistribution applies to inner nodes")
    plane = _Plane(b1, b2)
    first, second = [], []
    for c in parent.entries:
        a, b = plane.sides(c, eps)
        if a and b:
            h1, h2 = _cut(c, plane, eps)
            first.append(h1)
            second.append(h2)
        elif a:
            first.append(c)
        else:
            second.append(c)
    if not first or not second:
        raise SplitError("border plane leaves one side empty")
    return _inner_from(first), _inner_from(second)


@dataclass
class AuditReport:
    violations: list[str] = field(default_factory=list)
    nodes: int = 0
    points: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        return f"{len(self.violations)} violations"


@dataclass
class QueryStats:
    visited: int = 0
    total: int = 0

    @property
    def skipped_fraction(self) -> float:
        return 1.0 - self.visited / self.total if self.total else 0.0


class STree:
    def __init__(self, config: Optional[TreeConfig] = None, **kwargs):
        self.config = config if config is not None else TreeConfig(**kwargs)
        self.root: Optional[Node] = None
        self.size = 0
        self.last_insert_updates = 0
        self.last_query = QueryStats()

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[SparsePoint]:
        if self.root is not None:
            yield from self.root.points()

    @property
    def height(self) -> int:
        h, node = 0, self.root
        while node is not None:
            h += 1
            node = None if node.leaf else node.entries[0]
        return h

    def nodes(self) -> Iterator[tuple[int, Node]]:
        """Pre-order walk yielding ``(depth, node)``."""
        if self.root is None:
            return
        stack = [(0, self.root)]
        while stack:
            depth, node = stack.pop()
            yield depth, node
            if not node.leaf:
                stack.extend((depth + 1, c) for c in reversed(node.entries))

    def node_count(self) -> int:
        return sum(1 for _ in self.nodes())

    def leaves(self) -> list[Node]:
        return [n for _, n in self.nodes() if n.leaf]

    # -- insertion ---------------------------------------------------------

    def extend(self, points: Iterable[SparsePoint]) -> None:
        for p in points:
            self.insert(p)

    def insert(self, p: SparsePoint) -> None:
        check_dim(p, self.config.dim)
        self.size += 1
        if self.root is None:
            self.root = Node(True, [p], Ball(p, 0.0), include(EMPTY_SUMMARY, p))
            self.last_insert_updates = 1
            return
        updates = 0
        path: list[tuple[Node, int]] = []
        node = self.root
        d = dist(p, node.ball.center)
        while True:
            node.stats = include(node.stats, p)
            updates += 1
            if d > node.ball.radius:
                node.ball = expand_ball(node.ball, p, d)
                if path:
                    path[-1][0].invalidate()
            if node.leaf:
                node.entries.append(p)
                node.invalidate()
                break
            dists = _block_dists(node.block(), p)
            idx = choose_subnode(dists, node.block()[3])
            path.append((node, idx))
            node = node.entries[idx]
            d = float(dists[idx])
        self.last_insert_updates = updates
        self._fix_overflow(node, path)

    def _fix_overflow(self, node: Node, path: list[tuple[Node, int]]) -> None:
        cap = self.config.capacity
        while len(node.entries) > cap:
            n1, n2 = self._split(node)
            if not path:
                self.root = Node(False, [n1, n2], node.ball, node.stats)
                return
            parent, idx = path.pop()
            parent.entries[idx : idx + 1] = [n1, n2]
            parent.invalidate()
            node = parent

    def _partition(self, frame: EntryFrame) -> tuple[list[int], list[int]]:
        mode = self.config.split_mode
        if mode == "bruteforce" or (mode == "auto" and len(frame) <= self.config.brute_cutoff):
            return _split.bruteforce_partition(frame, self.config.brute_cutoff, self.config.min_fill)
        return _split.greedy_partition(frame, self.config.min_fill)

    def _split(self, node: Node) -> tuple[Node, Node]:
        if node.leaf:
            pts = node.entries
            frame = EntryFrame(pts)
            left, right = self._partition(frame)
            masks = np.zeros((2, len(pts)), dtype=bool)
            masks[0, left] = True
            masks[1, right] = True
            w, R, _ = frame.quasi_balls(masks)
            return (
                _leaf_from([pts[i] for i in left], frame.ball_of(w[0], R[0])),
                _leaf_from([pts[i] for i in right], frame.ball_of(w[1], R[1])),
            )
        kids = node.entries
        frame = EntryFrame([c.ball.center for c in kids], [c.ball.radius for c in kids])
        left, right = self._partition(frame)
        masks = np.zeros((2, len(kids)), dtype=bool)
        masks[0, left] = True
        masks[1, right] = True
        w, R, _ = frame.quasi_balls(masks, shrink=False)
        b1, b2 = frame.ball_of(w[0], R[0]), frame.ball_of(w[1], R[1])
        halves = self._plane_split(kids, b1, b2)
        if halves is not None:
            return halves
        return (
            _inner_from([kids[i] for i in left], b1),
            _inner_from([kids[i] for i in right], b2),
        )

    def _plane_split(self, kids: list[Node], b1: Ball, b2: Ball) -> Optional[tuple[Node, Node]]:
        """Redistribute children by the new border plane, or ``None`` when
        that would leave a side empty or over capacity."""
        eps, cap = self.config.geom_eps, self.config.capacity
        try:
            plane = _Plane(b1, b2)
        except SplitError:
            return None
        sides = []
        n_first = n_second = n_cut = 0
        for c in kids:
            a, b = plane.sides(c, eps)
            sides.append((a, b))
            if a and b:
                n_cut += 1
            elif a:
                n_first += 1
            else:
                n_second += 1
            if n_first + n_cut > cap or n_second + n_cut > cap:
                return None
        if min(n_first, n_second) + n_cut < self.config.min_fill:
            return None
        first, second = [], []
        for c, (a, b) in zip(kids, sides):
            if a and b:
                h1, h2 = _cut(c, plane, eps)
                first.append(h1)
                second.append(h2)
            elif a:
                first.append(c)
            else:
                second.append(c)
        if n_cut:
            log.debug("plane split cut %d of %d children", n_cut, len(kids))
        return _inner_from(first), _inner_from(second)

    # -- queries -----------------------------------------------------------

    def _lower_bounds(self, node: Node, q: SparsePoint) -> np.ndarray:
        block = node.block()
        d = _block_dists(block, q)
        radii = block[3]
        return d - radii - self.config.geom_eps * (1.0 + radii)

    def query_knn(self, q: SparsePoint, k: int) -> list[tuple[SparsePoint, float]]:
        """The ``k`` nearest stored points, nearest first.

        Equal distances are ordered by the points' wire bytes.  Subtrees
        whose ball lies farther than the current k-th distance are skipped.
        """
        if k < 1:
            raise ValueError("k must be positive")
        check_dim(q, self.config.dim)
        stats = QueryStats(total=self.node_count())
        self.last_query = stats
        if self.root is None:
            return []
        best: list[tuple[float, bytes, SparsePoint]] = []
        tie = 0
        root_lb = dist(q, self.root.ball.center) - self.root.ball.radius
        heap = [(root_lb - tolerance(self.root.ball.radius, self.config.geom_eps), tie, self.root)]
        while heap:
            lb, _, node = heapq.heappop(heap)
            bound = best[-1][0] if len(best) == k else math.inf
            if lb > bound:
                break
            stats.visited += 1
            if node.leaf:
                dists = _block_dists(node.block(), q)
                for i in np.flatnonzero(dists <= bound):
                    p = node.entries[i]
                    key = (float(dists[i]), p.sort_key(), p)
                    if len(best) < k:
                        bisect.insort(best, key, key=lambda e: e[:2])
                    elif key[:2] < best[-1][:2]:
                        best.pop()
                        bisect.insort(best, key, key=lambda e: e[:2])
                    bound = best[-1][0] if len(best) == k else math.inf
            else:
                lbs = self._lower_bounds(node, q)
                for c, v in zip(node.entries, lbs):
                    if v <= bound:
                        tie += 1
                        heapq.heappush(heap, (float(v), tie, c))
        return [(p, d) for d, _, p in best]

    def _range(self, q: SparsePoint, r: float) -> list[tuple[SparsePoint, float]]:
        if r < 0:
            raise ValueError("radius must be non-negative")
        check_dim(q, self.config.dim)
        stats = QueryStats(total=self.node_count())
        self.last_query = stats
        found: list[tuple[float, bytes, SparsePoint]] = []
        if self.root is None:
            return []
        stack = [self.root]
        root_lb = dist(q, self.root.ball.center) - self.root.ball.radius
        if root_lb - tolerance(self.root.ball.radius, self.config.geom_eps) > r:
            return []
        while stack:
            node = stack.pop()
            stats.visited += 1
            if node.leaf:
                dists = _block_dists(node.block(), q)
                for i in np.flatnonzero(dists <= r):
                    p = node.entries[i]
                    found.append((float(dists[i]), p.sort_key(), p))
            else:
                lbs = self._lower_bounds(node, q)
                stack.extend(c for c, v in zip(node.entries, lbs) if v <= r)
        found.sort(key=lambda e: e[:2])
        return [(p, d) for d, _, p in found]

    def query_ball(self, q: SparsePoint, r: float) -> list[SparsePoint]:
        """All stored points within distance ``r`` of ``q``, nearest first."""
        return [p for p, _ in self._range(q, r)]

    def browse(self, q: SparsePoint, depth: int = 0) -> list[tuple[Ball, StatSummary]]:
        """Cluster summaries ``depth`` levels below the root along ``q``'s path.

        Depth 0 lists the root's children.  Descent stops at a leaf, whose
        points are then listed as zero-radius summaries.
        """
        if self.root is None:
            return []
        if depth < 0 or depth > self.height:
            raise ValueError(f"depth must be in [0, {self.height}]")
        check_dim(q, self.config.dim)
        node = self.root
        for _ in range(depth):
            if node.leaf:
                break
            dists = _block_dists(node.block(), q)
            node = node.entries[choose_subnode(dists, node.block()[3])]
        return node.summaries()

    # -- deletion ----------------------------------------------------------

    def delete_ball(self, q: SparsePoint, r: float) -> int:
        """Remove every point within ``r`` of ``q``; returns how many.

        Subtrees whose ball lies inside the deletion ball are dropped whole.
        Empty nodes are removed; nothing is rebalanced.
        """
        if r < 0:
            raise ValueError("radius must be non-negative")
        check_dim(q, self.config.dim)
        if self.root is None:
            return 0
        before = self.root.stats.n
        removed = self._delete(self.root, q, r)
        if removed.n == before:
            self.root = None
            self.size = 0
            return removed.n
        self.size -= removed.n
        return removed.n

    def _delete(self, node: Node, q: SparsePoint, r: float) -> StatSummary:
        """Delete under ``node``; returns the removed points' summary.

        Every node that loses points rebuilds its summary from what is
        left, so repeated deletions never accumulate cancellation error.
        """
        eps = self.config.geom_eps
        d = dist(q, node.ball.center)
        tol = tolerance(node.ball.radius, eps)
        if d - node.ball.radius - tol > r:
            return EMPTY_SUMMARY
        if d + node.ball.radius + tol <= r:
            return node.stats
        if node.leaf:
            keep, gone = [], EMPTY_SUMMARY
            dists = _block_dists(node.block(), q)
            for p, dp in zip(node.entries, dists):
                if dp <= r:
                    gone = include(gone, p)
                else:
                    keep.append(p)
            if gone.n and keep:
                node.entries = keep
                node.stats = StatSummary.of(keep)
                node.invalidate()
            return gone
        gone = EMPTY_SUMMARY
        kept = []
        for c in node.entries:
            before = c.stats.n
            rem = self._delete(c, q, r)
            if rem.n == before:
                gone = merge(gone, rem)
                continue
            gone = merge(gone, rem)
            kept.append(c)
        if gone.n:
            node.invalidate()
            if kept:
                node.entries = kept
                node.stats = _merged(c.stats for c in kept)
        return gone

    # -- audit -------------------------------------------------------------

    def audit(self, stats_rtol: float = 1e-5) -> AuditReport:
        report = AuditReport()
        if self.root is None:
            if self.size:
                report.violations.append(f"empty tree reports size {self.size}")
            return report
        cap = self.config.capacity
        dim = self.config.dim
        leaf_depths: set[int] = set()

        def visit(node: Node, depth: int, ancestors: list[Node]) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
            report.nodes += 1
            tag = f"node@{depth}#{report.nodes}"
            if not 1 <= len(node.entries) <= cap:
                report.violations.append(f"{tag}: {len(node.entries)} entries outside [1, {cap}]")
            if not (node.ball.radius >= 0 and math.isfinite(node.ball.radius)):
                report.violations.append(f"{tag}: invalid radius {node.ball.radius}")
            if node.leaf:
                leaf_depths.add(depth)
                pts = node.entries
                for p in pts:
                    try:
                        check_dim(p, dim)
                    except DimensionError as exc:
                        report.violations.append(f"{tag}: {exc}")
                report.points += len(pts)
                block = node.block()
                for anc in [node] + ancestors:
                    dists = _block_dists(block, anc.ball.center)
                    limit = anc.ball.radius + tolerance(anc.ball.radius, self.config.geom_eps)
                    bad = int(np.sum(dists > limit))
                    if bad:
                        worst = float(dists.max() - anc.ball.radius)
                        report.violations.append(
                            f"{tag}: {bad} points outside ancestor ball (excess {worst:.3g})"
                        )
                keys = block[1]
                vals = block[2]
                sq = np.array([p.norm2() for p in pts])
                count = len(pts)
            else:
                parts = [visit(c, depth + 1, [node] + ancestors) for c in node.entries]
                keys = np.concatenate([x[0] for x in parts])
                vals = np.concatenate([x[1] for x in parts])
                sq = np.concatenate([x[2] for x in parts])
                count = sum(x[3] for x in parts)
                child_n = sum(c.stats.n for c in node.entries)
                if child_n != node.stats.n:
                    report.violations.append(f"{tag}: stats n {node.stats.n} != children sum {child_n}")
            self._check_stats(node, tag, keys, vals, sq, count, stats_rtol, report)
            return keys, vals, sq, count

        visit(self.root, 0, [])
        if len(leaf_depths) > 1:
            report.violations.append(f"leaves at different depths {sorted(leaf_depths)}")
        if report.points != self.size:
            report.violations.append(f"tree size {self.size} != stored points {report.points}")
        return report

    @staticmethod
    def _check_stats(node, tag, keys, vals, sq, count, rtol, report) -> None:
        s = node.stats
        if s.n != count:
            report.violations.append(f"{tag}: stats n {s.n} != point count {count}")
            return
        if count == 0:
            return
        uk, inv = np.unique(keys, return_inverse=True)
        total = np.bincount(inv, weights=vals, minlength=uk.size)
        batch_mean = total / count
        batch_sumsq = float(sq.sum())
        mean = np.zeros(uk.size)
        mk = s.mean.keys
        pos = np.searchsorted(uk, mk)
        if uk.size:
            inside = (pos < uk.size) & (uk[np.minimum(pos, uk.size - 1)] == mk)
        else:
            inside = np.zeros(mk.size, dtype=bool)
        mean[pos[inside]] = s.mean.vals[inside]
        stray = float(np.sum(s.mean.vals[~inside] ** 2))
        err = math.sqrt(float(np.sum((mean - batch_mean) ** 2)) + stray)
        scale = math.sqrt(batch_sumsq / count)
        if err > rtol * scale + 1e-300:
            report.violations.append(f"{tag}: mean off by {err:.3g} (scale {scale:.3g})")
        if abs(s.sumsq - batch_sumsq) > rtol * batch_sumsq + 1e-300:
            report.violations.append(f"{tag}: sumsq {s.sumsq!r} != batch {batch_sumsq!r}")
