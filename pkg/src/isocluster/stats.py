"""Count / mean / sum-of-squares summaries updated one point at a time.

The spread of a set is recovered from ``E|X|^2 - |E X|^2``, so a summary
only needs the count, the mean point and the running sum of squared
lengths.  Every update is constant work per summary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import EmptySummaryError, StatsUnderflowError
from .sparse_point import EMPTY, SparsePoint, axpby


@dataclass(frozen=True)
class StatSummary:
    n: int = 0
    mean: SparsePoint = EMPTY
    sumsq: float = 0.0

    @classmethod
    def of(cls, points: Iterable[SparsePoint]) -> "StatSummary":
        s = EMPTY_SUMMARY
        for p in points:
            s = include(s, p)
        return s

    def include(self, p: SparsePoint) -> "StatSummary":
        return include(self, p)

    def exclude(self, p: SparsePoint) -> "StatSummary":
        return exclude(self, p)

    def merge(self, other: "StatSummary") -> "StatSummary":
        return merge(self, other)

    def subtract(self, other: "StatSummary") -> "StatSummary":
        return subtract(self, other)

    def deviation(self) -> float:
        return deviation(self)

    def variance(self) -> float:
        if self.n == 0:
            raise EmptySummaryError("variance of an empty summary")
        return max(0.0, self.sumsq / self.n - self.mean.norm2())


EMPTY_SUMMARY = StatSummary()


def include(s: StatSummary, p: SparsePoint) -> StatSummary:
    n = s.n + 1
    if n == 1:
        return StatSummary(1, p, p.norm2())
    # M + (P - M)/N, fused into one pass over the union of supports
    mean = axpby(1.0 - 1.0 / n, s.mean, 1.0 / n, p)
    return StatSummary(n, mean, s.sumsq + p.norm2())


def exclude(s: StatSummary, p: SparsePoint) -> StatSummary:
    if s.n == 0:
        raise StatsUnderflowError("cannot exclude from an empty summary")
    n = s.n - 1
    if n == 0:
        return EMPTY_SUMMARY
    mean = axpby(s.n / n, s.mean, -1.0 / n, p)
    return StatSummary(n, mean, max(0.0, s.sumsq - p.norm2()))


def merge(a: StatSummary, b: StatSummary) -> StatSummary:
    if b.n == 0:
        return a
    if a.n == 0:
        return b
    n = a.n + b.n
    mean = axpby(a.n / n, a.mean, b.n / n, b.mean)
    return StatSummary(n, mean, a.sumsq + b.sumsq)


def subtract(a: StatSummary, b: StatSummary) -> StatSummary:
    """Inverse of :func:`merge`: remove the points summarised by ``b``."""
    if b.n == 0:
        return a
    if b.n > a.n:
        raise StatsUnderflowError(f"cannot remove {b.n} points from a summary of {a.n}")
    n = a.n - b.n
    if n == 0:
        return EMPTY_SUMMARY
    mean = axpby(a.n / n, a.mean, -b.n / n, b.mean)
    return StatSummary(n, mean, max(0.0, a.sumsq - b.sumsq))


def deviation(s: StatSummary) -> float:
    """Root-mean-square distance of the points from their mean."""
    if s.n == 0:
        raise EmptySummaryError("deviation of an empty summary")
    return math.sqrt(max(0.0, s.sumsq / s.n - s.mean.norm2()))

