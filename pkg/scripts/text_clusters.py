"""Vectorize short documents, index them and list the resulting leaf clusters.

    python scripts/text_clusters.py [FILE ...]

Each non-empty line of the inputs is one document; without inputs a small
built-in collection is used.
"""

import argparse
import sys

from isocluster import STree, vectorize
from isocluster.vectorizer import SEMANTIC_DIM

DOCS = [
    "The goalkeeper saved a penalty in the final minute of the match.",
    "Fans cheered as the striker scored twice in the derby.",
    "The coach praised his defenders after the league win.",
    "Heavy rain and strong winds are expected along the coast tonight.",
    "Forecasters warned of snow and freezing fog in the mountains.",
    "A warm front will bring sunshine and mild temperatures this weekend.",
    "The central bank raised interest rates to slow inflation.",
    "Shares fell sharply after the company reported lower profits.",
    "Investors moved money into bonds as markets turned volatile.",
    "Bake the bread for forty minutes until the crust is golden.",
    "Stir the sauce slowly and add butter, garlic and fresh herbs.",
    "Roast the chicken with lemon, thyme and olive oil.",
]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("inputs", nargs="*")
    ap.add_argument("--capacity", type=int, default=4)
    ap.add_argument("-k", type=int, default=3, help="neighbours listed for the first document")
    args = ap.parse_args(argv)

    docs = []
    for path in args.inputs:
        with open(path, encoding="utf-8") as fh:
            docs.extend(line.strip() for line in fh if line.strip())
    docs = docs or DOCS

    tree = STree(dim=SEMANTIC_DIM, capacity=args.capacity)
    text_of = {}
    for doc in docs:
        p = vectorize(doc)
        if p.nnz == 0:
            continue
        text_of.setdefault(p.sort_key(), doc)
        tree.insert(p)

    for i, leaf in enumerate(tree.leaves()):
        print(f"cluster {i} (radius {leaf.ball.radius:.4f})")
        for p in leaf.entries:
            print(f"  {text_of[p.sort_key()]}")
    q = vectorize(docs[0])
    print(f"nearest to: {docs[0]}")
    for p, d in tree.query_knn(q, args.k):
        print(f"  {d:.4f}  {text_of[p.sort_key()]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
