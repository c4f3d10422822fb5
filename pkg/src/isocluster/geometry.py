"""Bounding balls: growth, shrinking, small exact balls and border planes.

Regions are always balls so that no coordinate direction is special.
Containment is checked with a relative tolerance ``eps * (1 + radius)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError, DegeneratePlaneError
from . import _kernels as _k
from .sparse_point import EMPTY, SparsePoint, axpby, csr, dist, dist2, dot, sub

GEOM_EPS = 1e-6


def tolerance(radius: float, eps: float = GEOM_EPS) -> float:
    return eps * (1.0 + radius)


@dataclass(frozen=True)
class Ball:
    center: SparsePoint
    radius: float

    def __post_init__(self):
        if not (self.radius >= 0.0 and math.isfinite(self.radius)):
            raise DegenerateInputError(f"invalid radius {self.radius!r}")

    def contains(self, p: SparsePoint, eps: float = GEOM_EPS) -> bool:
        return dist(p, self.center) <= self.radius + tolerance(self.radius, eps)


def point_ball(p: SparsePoint) -> Ball:
    return Ball(p, 0.0)


def ball_distance(q: SparsePoint, b: Ball) -> float:
    """Distance from ``q`` to the surface of ``b``; zero inside."""
    return max(0.0, dist(q, b.center) - b.radius)


def expand_ball(b: Ball, q: SparsePoint, d: float | None = None) -> Ball:
    """Smallest growth of ``b`` along the line to ``q`` that covers ``q``.

    The center moves toward ``q`` by half the gap and the radius grows by
    the same amount, so the old ball stays inside the new one.
    ``d`` may carry a precomputed ``dist(q, b.center)``.
    """
    if d is None:
        d = dist(q, b.center)
    h = d - b.radius
    if h <= 0.0:
        return b
    t = 0.5 * h / d
    return Ball(axpby(1.0 - t, b.center, t, q), b.radius + 0.5 * h)


def shrink_ball(b: Ball, q: SparsePoint, pts: Sequence[SparsePoint], eps: float = GEOM_EPS) -> Ball:
    """Pull the center of ``b`` toward ``q`` as far as ``pts`` allow.

    ``b`` must pass through ``q``.  For each point ``A`` the ball through
    ``q`` and ``A`` centred on the segment has radius
    ``|Aq|^2 / (2 |Tq|)`` where ``|Tq|`` is the projection of ``A - q`` on
    the center direction; the largest of these covers every point.
    """
    if not pts:
        return Ball(q, 0.0)
    u = sub(b.center, q)
    length = math.sqrt(u.norm2())
    if abs(length - b.radius) > tolerance(b.radius, eps):
        raise DegenerateInputError("ball does not pass through the anchor point")
    if length == 0.0:
        return b
    s = 0.0
    for a in pts:
        aq = sub(a, q)
        sq = aq.norm2()
        if sq == 0.0:
            continue
        proj = dot(aq, u) / length
        if proj <= 0.0:
            # A behind q: no ball through q on this ray can hold it
            continue
        s = max(s, sq / (2.0 * proj))
    s = min(s, b.radius)
    if s == b.radius:
        return b
    t = s / length
    return Ball(axpby(t, b.center, 1.0 - t, q), s)


def circumradius(l1: float, l2: float, l3: float) -> float:
    """Radius of the circle through a triangle with the given side lengths."""
    f1 = l2 + l3 - l1
    f2 = l1 - l2 + l3
    f3 = l1 + l2 - l3
    if min(l1, l2, l3) <= 0.0 or f1 <= 0.0 or f2 <= 0.0 or f3 <= 0.0:
        raise DegenerateInputError(f"degenerate triangle ({l1}, {l2}, {l3})")
    return l1 * l2 * l3 / math.sqrt((l1 + l2 + l3) * f1 * f2 * f3)


def min_ball_exact_small(pts: Sequence[SparsePoint]) -> Ball:
    """Exact minimal enclosing ball of one, two or three points."""
    pts = list(pts)
    if not pts:
        raise DegenerateInputError("minimal ball of an empty set")
    if len(pts) > 3:
        raise DegenerateInputError("exact minimal ball supports at most 3 points")
    if len(pts) == 1:
        return Ball(pts[0], 0.0)
    if len(pts) == 2:
        a, b = pts
        return Ball(axpby(0.5, a, 0.5, b), 0.5 * dist(a, b))
    d2 = {(i, j): dist2(pts[i], pts[j]) for i, j in ((0, 1), (0, 2), (1, 2))}
    ia, ib = max(d2, key=lambda ij: (d2[ij], -ij[0], -ij[1]))
    ix = 3 - ia - ib
    a, b, x = pts[ia], pts[ib], pts[ix]
    ax, xb, ab = d2[tuple(sorted((ia, ix)))], d2[tuple(sorted((ib, ix)))], d2[(ia, ib)]
    if ax + xb <= ab:
        return Ball(axpby(0.5, a, 0.5, b), 0.5 * math.sqrt(ab))
    radius = circumradius(math.sqrt(xb), math.sqrt(ax), math.sqrt(ab))
    # barycentric weights of the circumcenter from squared side lengths
    wa = xb * (ax + ab - xb)
    wb = ax * (xb + ab - ax)
    wx = ab * (ax + xb - ab)
    total = wa + wb + wx
    center = axpby(wa / total, a, wb / total, b)
    center = axpby(1.0, center, wx / total, x)
    return Ball(center, radius)


def plane_side(x: SparsePoint, b1: Ball, b2: Ball) -> float:
    """Signed power difference of ``x`` with respect to two balls.

    Negative on ``b1``'s side of their border plane, positive on ``b2``'s.
    """
    if b1.center == b2.center:
        raise DegeneratePlaneError("border plane of concentric balls is undefined")
    return dist2(b1.center, x) - dist2(b2.center, x) - b1.radius**2 + b2.radius**2


def overlap_margin(b1: Ball, b2: Ball) -> float:
    big, small = (b1, b2) if b1.radius >= b2.radius else (b2, b1)
    return dist2(b1.center, b2.center) - (big.radius**2 - small.radius**2)


def margin_from(l2: float, r1: float, r2: float) -> float:
    big, small = (r1, r2) if r1 >= r2 else (r2, r1)
    return l2 - (big * big - small * small)


class EntryFrame:
    """A small set of balls (points have radius 0) prepared for repeated
    bounding-ball construction over subsets of it.

    Centers of constructed balls are kept as affine weights over the entry
    centers and squared distances to every entry are updated in closed
    form, so no sparse arithmetic happens until a center is materialised.
    Each subset is evaluated independently of the others in a batch.
    """

    def __init__(self, centers: Sequence[SparsePoint], radii=None):
        self.centers = list(centers)
        n = len(self.centers)
        self.indptr, self.ckeys, self.cvals = csr(self.centers)
        self.r = np.zeros(n) if radii is None else np.ascontiguousarray(radii, dtype=np.float64)
        self.D2 = _k.pairwise_dist2(self.indptr, self.ckeys, self.cvals)
        self.D = np.sqrt(self.D2)
        self.reach = self.D + self.r[:, None] + self.r[None, :]
        self.points_only = not np.any(self.r > 0.0)

    def __len__(self) -> int:
        return len(self.centers)

    def farthest_pair(self, members: np.ndarray | None = None) -> tuple[int, int]:
        n = len(self)
        if members is None:
            members = np.ones(n, dtype=bool)
        if np.count_nonzero(members) < 2:
            raise DegenerateInputError("farthest pair needs two entries")
        a, b = _k.farthest_pair(np.asarray(members, dtype=bool), self.reach)
        return int(a), int(b)

    def center_of(self, w: np.ndarray) -> SparsePoint:
        nz = np.flatnonzero(w)
        if nz.size == 1 and w[nz[0]] == 1.0:
            return self.centers[int(nz[0])]
        keys, vals = _k.combine_rows(self.indptr, self.ckeys, self.cvals, np.ascontiguousarray(w, dtype=np.float64))
        return SparsePoint(keys, vals, check=False) if keys.size else EMPTY

    def ball_of(self, w: np.ndarray, radius: float) -> Ball:
        return Ball(self.center_of(w), float(radius))

    def seed(self, i: int) -> tuple[np.ndarray, float, np.ndarray]:
        """Weights, radius and squared distances of entry ``i``'s own ball."""
        w = np.zeros(len(self))
        w[i] = 1.0
        return w, float(self.r[i]), self.D2[i].copy()

    def grow(self, w, R, d, j):
        """Expand the ball ``(w, R)`` to cover entry ``j``; ``d`` holds
        squared center-to-entry distances.  Returns updated copies."""
        w = np.array(w, dtype=np.float64)
        d = np.array(d, dtype=np.float64)
        R, _ = _k.grow(w, float(R), d, int(j), self.D2, self.r)
        return w, float(R), d

    def quasi_balls(self, members: np.ndarray, shrink: bool = True):
        """Quasi-minimal bounding balls for a batch of entry subsets.

        ``members`` is an ``(S, n)`` boolean mask.  Returns weights
        ``(S, n)``, radii ``(S,)`` and squared center-to-entry distances
        ``(S, n)``.
        """
        members = np.ascontiguousarray(np.atleast_2d(np.asarray(members, dtype=bool)))
        if members.shape[1] != len(self):
            raise DegenerateInputError("membership mask does not match the entries")
        if not members.any(axis=1).all():
            raise DegenerateInputError("bounding ball of an empty subset")
        return _k.quasi_rows(self.D2, self.D, self.r, members, bool(shrink))


def quasi_min_ball(pts: Sequence[SparsePoint], shrink: bool = True) -> Ball:
    """Approximate minimal enclosing ball.

    Seeds with the diameter ball of the farthest pair, grows it over every
    point left outside (in input order), then shrinks once toward the last
    point that forced growth.
    """
    pts = list(pts)
    if not pts:
        raise DegenerateInputError("bounding ball of an empty set")
    if len(pts) == 1:
        return Ball(pts[0], 0.0)
    frame = EntryFrame(pts)
    w, R, _ = frame.quasi_balls(np.ones((1, len(pts)), dtype=bool), shrink=shrink)
    return frame.ball_of(w[0], R[0])


def enclosing_ball(balls: Sequence[Ball]) -> Ball:
    """Quasi-minimal ball covering every ball in ``balls`` entirely."""
    balls = list(balls)
    if not balls:
        raise DegenerateInputError("bounding ball of an empty set")
    if len(balls) == 1:
        return balls[0]
    frame = EntryFrame([b.center for b in balls], [b.radius for b in balls])
    w, R, _ = frame.quasi_balls(np.ones((1, len(balls)), dtype=bool), shrink=False)
    return frame.ball_of(w[0], R[0])
