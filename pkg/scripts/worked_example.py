"""Build the five-point 1-D tree and compare its split with the alternative.

    python scripts/worked_example.py [--dot]
"""

import argparse
import sys

from isocluster import STree
from isocluster.render import render_dot
from isocluster.sparse_point import SparsePoint
from isocluster.stats import StatSummary, deviation

VALUES = (0, 4, 5, 9, 13)


def spread(xs) -> float:
    return deviation(StatSummary.of(SparsePoint.from_dense([x]) for x in xs))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dot", action="store_true", help="also print the tree as DOT")
    args = ap.parse_args(argv)

    tree = STree(dim=1, capacity=4)
    tree.extend(SparsePoint.from_dense([x]) for x in VALUES)
    total = 0.0
    for leaf in tree.leaves():
        xs = sorted(float(p.to_dense(1)[0]) for p in leaf.entries)
        total += spread(xs)
        print(f"leaf {xs}: center {leaf.ball.center.to_dense(1)[0]:g} radius {leaf.ball.radius:g} "
              f"deviation {spread(xs):.4f}")
    alt = spread([0, 4]) + spread([5, 9, 13])
    print(f"deviation sum {total:.4f}; alternative {{0,4}}/{{5,9,13}} gives {alt:.4f}")
    if args.dot:
        sys.stdout.write(render_dot(tree))
    return 0


if __name__ == "__main__":
    sys.exit(main())
