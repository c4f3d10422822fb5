"""Sparse points in a high-dimensional Euclidean space.

A point keeps only its non-zero coordinates: an ascending array of
coordinate indices and the matching values.  Coordinates that cancel to
exactly zero are dropped, so two points are equal iff their stored arrays
are equal.  All reductions are carried out in float64.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional

import numpy as np

from . import _kernels as _k
from .errors import DimensionError, InvalidPointError

_EMPTY_KEYS = np.zeros(0, dtype=np.int64)
_EMPTY_VALS = np.zeros(0, dtype=np.float64)


class SparsePoint:
    """Immutable sparse vector.

    ``keys`` is a strictly increasing int64 array, ``vals`` a float64 array
    of the same length without exact zeros.
    """

    __slots__ = ("keys", "vals", "_norm2", "_bytes")

    def __init__(self, keys=(), vals=(), *, check: bool = True):
        keys = np.asarray(keys, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if check:
            if keys.ndim != 1 or vals.ndim != 1 or keys.shape != vals.shape:
                raise InvalidPointError("keys and vals must be 1-D arrays of equal length")
            if keys.size:
                if keys[0] < 0:
                    raise InvalidPointError("negative coordinate index")
                if keys.size > 1 and not np.all(keys[1:] > keys[:-1]):
                    raise InvalidPointError("coordinate indices must be strictly increasing")
                if not np.all(np.isfinite(vals)):
                    raise InvalidPointError("coordinate values must be finite")
                if np.any(vals == 0.0):
                    raise InvalidPointError("zero values must be elided")
            keys = keys.copy()
            vals = vals.copy()
        keys.flags.writeable = False
        vals.flags.writeable = False
        self.keys = keys
        self.vals = vals
        self._norm2: Optional[float] = None
        self._bytes: Optional[bytes] = None

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "SparsePoint":
        """Build from ``(index, value)`` pairs; zero values are dropped."""
        items = sorted((int(k), float(v)) for k, v in pairs if v != 0)
        for (k1, _), (k2, _) in zip(items, items[1:]):
            if k1 == k2:
                raise InvalidPointError(f"duplicate coordinate index {k1}")
        if not items:
            return EMPTY
        keys, vals = zip(*items)
        return cls(keys, vals)

    @classmethod
    def from_dense(cls, values) -> "SparsePoint":
        arr = np.asarray(values, dtype=np.float64).ravel()
        keys = np.flatnonzero(arr)
        return cls(keys, arr[keys])

    @property
    def nnz(self) -> int:
        return int(self.keys.size)

    def to_dense(self, dim: int) -> np.ndarray:
        if self.keys.size and self.keys[-1] >= dim:
            raise DimensionError(f"index {int(self.keys[-1])} >= dimensionality {dim}")
        out = np.zeros(dim, dtype=np.float64)
        out[self.keys] = self.vals
        return out

    def pairs(self) -> list[tuple[int, float]]:
        return list(zip(self.keys.tolist(), self.vals.tolist()))

    def max_key(self) -> int:
        return int(self.keys[-1]) if self.keys.size else -1

    def norm2(self) -> float:
        if self._norm2 is None:
            self._norm2 = float(np.dot(self.vals, self.vals))
        return self._norm2

    def sort_key(self) -> bytes:
        """Bytes of the 32-bit wire layout; gives a total order on points."""
        if self._bytes is None:
            from .persistence import point_bytes

            self._bytes = point_bytes(self)
        return self._bytes

    def __getitem__(self, i: int) -> float:
        return get(self, i)

    def __len__(self) -> int:
        return self.nnz

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparsePoint):
            return NotImplemented
        return np.array_equal(self.keys, other.keys) and np.array_equal(self.vals, other.vals)

    def __hash__(self) -> int:
        return hash((self.keys.tobytes(), self.vals.tobytes()))

    def __add__(self, other: "SparsePoint") -> "SparsePoint":
        return add(self, other)

    def __sub__(self, other: "SparsePoint") -> "SparsePoint":
        return sub(self, other)

    def __mul__(self, s: float) -> "SparsePoint":
        return scale(self, s)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        body = ", ".join(f"({k}, {v:g})" for k, v in self.pairs()[:8])
        more = ", ..." if self.nnz > 8 else ""
        return f"SparsePoint({{{body}{more}}})"


EMPTY = SparsePoint(_EMPTY_KEYS, _EMPTY_VALS, check=False)


def check_dim(p: SparsePoint, dim: int) -> None:
    if p.keys.size and p.keys[-1] >= dim:
        raise DimensionError(f"index {int(p.keys[-1])} >= dimensionality {dim}")


def get(p: SparsePoint, i: int, dim: Optional[int] = None) -> float:
    if i < 0 or (dim is not None and i >= dim):
        raise DimensionError(f"index {i} outside [0, {dim})")
    k = int(np.searchsorted(p.keys, i))
    if k < p.keys.size and p.keys[k] == i:
        return float(p.vals[k])
    return 0.0


def _finish(keys: np.ndarray, vals: np.ndarray) -> SparsePoint:
    nz = vals != 0.0
    if not nz.all():
        keys = keys[nz]
        vals = vals[nz]
    return SparsePoint(keys, vals, check=False)


def axpby(alpha: float, a: SparsePoint, beta: float, b: SparsePoint) -> SparsePoint:
    """Return ``alpha*a + beta*b`` with exact zeros elided."""
    if b.keys.size == 0 or beta == 0.0:
        return scale(a, alpha)
    if a.keys.size == 0 or alpha == 0.0:
        return scale(b, beta)
    keys, vals = _k.merge_axpby(a.keys, a.vals, float(alpha), b.keys, b.vals, float(beta))
    if keys.size == 0:
        return EMPTY
    return SparsePoint(keys, vals, check=False)


def add(a: SparsePoint, b: SparsePoint) -> SparsePoint:
    return axpby(1.0, a, 1.0, b)


def sub(a: SparsePoint, b: SparsePoint) -> SparsePoint:
    return axpby(1.0, a, -1.0, b)


def scale(p: SparsePoint, s: float) -> SparsePoint:
    if not math.isfinite(s):
        raise InvalidPointError("scale factor must be finite")
    if s == 0.0 or p.keys.size == 0:
        return EMPTY
    if s == 1.0:
        return p
    return _finish(p.keys, p.vals * s)


def norm2(p: SparsePoint) -> float:
    return p.norm2()


def dot(a: SparsePoint, b: SparsePoint) -> float:
    if a.keys.size == 0 or b.keys.size == 0:
        return 0.0
    return float(_k.sparse_dot(a.keys, a.vals, b.keys, b.vals))


def dist2(a: SparsePoint, b: SparsePoint) -> float:
    return float(_k.sparse_dist2(a.keys, a.vals, b.keys, b.vals))


def dist(a: SparsePoint, b: SparsePoint) -> float:
    return math.sqrt(dist2(a, b))


def merge_add(a: SparsePoint, b: SparsePoint, counter: Optional[list] = None) -> SparsePoint:
    """Reference two-pointer merge of two sorted coordinate lists.

    If ``counter`` is given, ``counter[0]`` is incremented once per loop
    step (including the tail copies) so the linear cost can be checked.
    """
    ak, av = a.keys.tolist(), a.vals.tolist()
    bk, bv = b.keys.tolist(), b.vals.tolist()
    na, nb = len(ak), len(bk)
    zk: list[int] = []
    zv: list[float] = []
    ia = ib = steps = 0
    while ia != na and ib != nb:
        steps += 1
        if ak[ia] == bk[ib]:
            s = av[ia] + bv[ib]
            if s != 0.0:
                zk.append(ak[ia])
                zv.append(s)
            ia += 1
            ib += 1
        elif ak[ia] < bk[ib]:
            zk.append(ak[ia])
            zv.append(av[ia])
            ia += 1
        else:
            zk.append(bk[ib])
            zv.append(bv[ib])
            ib += 1
    for k, v in zip(ak[ia:], av[ia:]):
        steps += 1
        zk.append(k)
        zv.append(v)
    for k, v in zip(bk[ib:], bv[ib:]):
        steps += 1
        zk.append(k)
        zv.append(v)
    if counter is not None:
        counter[0] += steps
    return SparsePoint(zk, zv, check=False) if zk else EMPTY


def compact_dense(points: list[SparsePoint]) -> tuple[np.ndarray, np.ndarray]:
    """Densify a small set of points over the union of their supports.

    Returns ``(keys, X)`` where row ``i`` of ``X`` holds point ``i`` on the
    coordinates ``keys``.  Distances between rows equal true distances.
    """
    if not points:
        return _EMPTY_KEYS, np.zeros((0, 0))
    keys = np.unique(np.concatenate([p.keys for p in points]))
    X = np.zeros((len(points), keys.size), dtype=np.float64)
    for i, p in enumerate(points):
        if p.keys.size:
            X[i, np.searchsorted(keys, p.keys)] = p.vals
    return keys, X


def from_compact(keys: np.ndarray, row: np.ndarray) -> SparsePoint:
    return _finish(keys, np.asarray(row, dtype=np.float64))


def csr(points: list[SparsePoint]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack points as ``(indptr, keys, vals)``."""
    indptr = np.zeros(len(points) + 1, dtype=np.int64)
    if not points:
        return indptr, _EMPTY_KEYS, _EMPTY_VALS
    np.cumsum([p.keys.size for p in points], out=indptr[1:])
    return indptr, np.concatenate([p.keys for p in points]), np.concatenate([p.vals for p in points])
