"""Insert N random sparse points and report wall time and peak memory.

    python scripts/scale_smoke.py --n 100000 [--json]
"""

import argparse
import json
import resource
import sys
import time

import numpy as np

from isocluster import SparsePoint, STree, TreeConfig


def random_points(n: int, dim: int, nnz: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        keys = np.sort(rng.choice(dim, size=nnz, replace=False))
        yield SparsePoint(keys, rng.uniform(0.01, 1.0, size=nnz))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--dim", type=int, default=1024)
    ap.add_argument("--nnz", type=int, default=32)
    ap.add_argument("--capacity", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    points = list(random_points(args.n, args.dim, args.nnz, args.seed))
    tree = STree(TreeConfig(dim=args.dim, capacity=args.capacity))
    # warm the compiled kernels so the timing covers insertion only
    STree(TreeConfig(dim=args.dim, capacity=4)).extend(points[:50])

    start = time.perf_counter()
    for p in points:
        tree.insert(p)
    seconds = time.perf_counter() - start
    rss_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0
    result = {
        "n": len(tree),
        "seconds": round(seconds, 3),
        "per_insert_ms": round(1e3 * seconds / max(1, args.n), 4),
        "peak_rss_mb": round(rss_mb, 1),
        "height": tree.height,
        "nodes": tree.node_count(),
    }
    if args.json:
        print(json.dumps(result))
    else:
        for k, v in result.items():
            print(f"{k:>14}: {v}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
