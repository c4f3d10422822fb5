"""Point builders shared by the tests."""

import numpy as np

from isocluster.sparse_point import SparsePoint


def random_point(rng, dim=1024, nnz=32, scale=1.0) -> SparsePoint:
    keys = np.sort(rng.choice(dim, size=nnz, replace=False))
    vals = rng.normal(0.0, scale, size=nnz)
    vals[vals == 0.0] = 1.0
    return SparsePoint(keys, vals)


def p1(x: float) -> SparsePoint:
    """1-D point."""
    return SparsePoint.from_dense([x])


def p2(x: float, y: float) -> SparsePoint:
    return SparsePoint.from_dense([x, y])
