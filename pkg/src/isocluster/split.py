"""Two-way partitioning of an overloaded node.

Entries are points or child balls.  The two most distant entries (center
distance plus both radii) always end up in different halves.  The
exhaustive search ranks partitions by the sum of squared quasi-minimal
radii, breaking ties by the larger overlap margin; the greedy pass grows
two balls from the farthest pair and places each remaining entry where
the margin between the balls stays largest.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from . import _kernels as _k
from .errors import SplitError
from .geometry import Ball, EntryFrame, margin_from
from .sparse_point import SparsePoint

Entry = Union[SparsePoint, Ball]

MAX_BRUTE_CUTOFF = 20


def frame_of(entries: Sequence[Entry]) -> EntryFrame:
    centers, radii = [], []
    for e in entries:
        if isinstance(e, Ball):
            centers.append(e.center)
            radii.append(e.radius)
        else:
            centers.append(e)
            radii.append(0.0)
    return EntryFrame(centers, radii)


def _masks(n: int, left: Sequence[int], right: Sequence[int]) -> np.ndarray:
    m = np.zeros((2, n), dtype=bool)
    m[0, list(left)] = True
    m[1, list(right)] = True
    return m


def _center_gap2(wa, da, wb, db) -> np.ndarray:
    # |Ca - Cb|^2 = sum_i wb_i |Ca - x_i|^2 - sum_i wb_i |Cb - x_i|^2
    return np.maximum(np.sum(wb * da, axis=-1) - np.sum(wb * db, axis=-1), 0.0)


def partition_objective(frame: EntryFrame, left: Sequence[int], right: Sequence[int]) -> tuple[float, float]:
    """(sum of squared quasi-minimal radii, overlap margin) of a partition."""
    w, R, d = frame.quasi_balls(_masks(len(frame), left, right))
    gap2 = float(_center_gap2(w[0], d[0], w[1], d[1]))
    return float(R[0] ** 2 + R[1] ** 2), margin_from(gap2, float(R[0]), float(R[1]))


def _check_fill(n: int, min_fill: int) -> None:
    if n < 2:
        raise SplitError("need at least two entries to split")
    if not 1 <= min_fill <= n // 2:
        raise SplitError(f"min_fill {min_fill} impossible for {n} entries")


def greedy_partition(frame: EntryFrame, min_fill: int = 1) -> tuple[list[int], list[int]]:
    _check_fill(len(frame), min_fill)
    side, _, _ = _k.greedy_sides(frame.D2, frame.D, frame.r, min_fill)
    return np.flatnonzero(side == 0).tolist(), np.flatnonzero(side == 1).tolist()


def bruteforce_partition(frame: EntryFrame, cutoff: int = 12, min_fill: int = 1) -> tuple[list[int], list[int]]:
    n = len(frame)
    _check_fill(n, min_fill)
    if n > min(cutoff, MAX_BRUTE_CUTOFF):
        raise SplitError(f"exhaustive split refused for {n} entries (cutoff {cutoff})")
    a, b = frame.farthest_pair()
    others = np.array([i for i in range(n) if i != a and i != b], dtype=np.int64)
    m = others.size
    choice = ((np.arange(1 << m)[:, None] >> np.arange(m)[None, :]) & 1).astype(bool)
    S = choice.shape[0]
    left = np.zeros((S, n), dtype=bool)
    left[:, a] = True
    left[:, others] = choice
    sizes = left.sum(axis=1)
    keep = (sizes >= min_fill) & (n - sizes >= min_fill)
    left = left[keep]
    S = left.shape[0]
    right = ~left
    w, R, d = frame.quasi_balls(np.concatenate([left, right]))
    RL, RR = R[:S], R[S:]
    obj = RL**2 + RR**2
    best = np.flatnonzero(obj == obj.min())
    if best.size > 1:
        gap2 = _center_gap2(w[best], d[best], w[S + best], d[S + best])
        big = np.maximum(RL[best], RR[best])
        small = np.minimum(RL[best], RR[best])
        margins = gap2 - (big * big - small * small)
        k = int(best[int(np.argmax(margins))])
    else:
        k = int(best[0])
    return np.flatnonzero(left[k]).tolist(), np.flatnonzero(right[k]).tolist()


def split_greedy(entries: Sequence[Entry], min_fill: int = 1) -> tuple[list[Entry], list[Entry]]:
    entries = list(entries)
    if len(entries) < 2:
        raise SplitError("need at least two entries to split")
    left, right = greedy_partition(frame_of(entries), min_fill)
    return [entries[i] for i in left], [entries[i] for i in right]


def split_bruteforce(
    entries: Sequence[Entry], cutoff: int = 12, min_fill: int = 1
) -> tuple[list[Entry], list[Entry]]:
    entries = list(entries)
    if len(entries) < 2:
        raise SplitError("need at least two entries to split")
    left, right = bruteforce_partition(frame_of(entries), cutoff, min_fill)
    return [entries[i] for i in left], [entries[i] for i in right]
