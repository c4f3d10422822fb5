"""Balanced clustering index over sparse high-dimensional points.

Nodes are bounded by balls and carry running count, mean and
sum-of-squares statistics, so every cluster's centre and spread is
available at any time.
"""

from .errors import IsoClusterError
from .geometry import Ball, circumradius, enclosing_ball, expand_ball, min_ball_exact_small, quasi_min_ball, shrink_ball
from .persistence import decode_point, encode_point, ingest, load_tree, save_tree
from .sparse_point import SparsePoint, add, dist, dot, norm2, scale, sub
from .split import split_bruteforce, split_greedy
from .stats import StatSummary
from .stree import STree, TreeConfig
from .vectorizer import Lexicon, vectorize

__all__ = [
    "Ball",
    "IsoClusterError",
    "Lexicon",
    "STree",
    "SparsePoint",
    "StatSummary",
    "TreeConfig",
    "add",
    "circumradius",
    "decode_point",
    "dist",
    "dot",
    "enclosing_ball",
    "encode_point",
    "expand_ball",
    "ingest",
    "load_tree",
    "min_ball_exact_small",
    "norm2",
    "quasi_min_ball",
    "save_tree",
    "scale",
    "shrink_ball",
    "split_bruteforce",
    "split_greedy",
    "sub",
    "vectorize",
]
