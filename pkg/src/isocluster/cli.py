"""Command-line front end: ``python -m isocluster <command> ...``."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from typing import Optional, Sequence

from . import persistence as io_
from .errors import IsoClusterError
from .render import render_dot, render_svg
from .sparse_point import SparsePoint
from .stree import STree, TreeConfig
from .vectorizer import Lexicon, vectorize

log = logging.getLogger("isocluster")


class _Out:
    """Writes records as ``key=value`` text or one JSON object per line."""

    def __init__(self, fmt: str, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout

    def record(self, text: str, **fields) -> None:
        if self.fmt == "json":
            self.stream.write(json.dumps(fields, sort_keys=True) + "\n")
        else:
            self.stream.write(text + "\n")


def _digest(p: SparsePoint) -> str:
    return hashlib.sha1(io_.point_bytes(p, wide=True)).hexdigest()[:12]


def _config(args) -> TreeConfig:
    return TreeConfig(dim=args.dim, capacity=args.capacity, split_mode=args.split)


def _load(args) -> STree:
    if not args.tree:
        raise IsoClusterError("--tree is required")
    if not os.path.exists(args.tree):
        raise IsoClusterError(f"snapshot {args.tree} not found")
    return io_.load_tree(args.tree)


def _query(args, tree: STree) -> SparsePoint:
    if args.query is None:
        raise IsoClusterError("--query is required")
    try:
        return io_.parse_point(args.query, tree.config.dim)
    except ValueError as exc:
        raise IsoClusterError(f"malformed query point: {exc}") from None


def _ingest(args, dim: int):
    report = io_.IngestReport()
    points = []
    for path in args.inputs:
        src = sys.stdin if path == "-" else path
        points.extend(io_.ingest_file(src, dim=dim, on_error=args.on_error, report=report))
    if report.skipped:
        log.warning("%d malformed lines skipped", len(report.skipped))
    return points


def _summary(tree: STree, out: _Out) -> None:
    leaves = tree.leaves()
    radii = [leaf.ball.radius for leaf in leaves]
    fields = {
        "n": len(tree),
        "height": tree.height,
        "nodes": tree.node_count(),
        "leaves": len(leaves),
        "max_leaf_radius": max(radii, default=0.0),
        "mean_leaf_radius": sum(radii) / len(radii) if radii else 0.0,
    }
    out.record(" ".join(f"{k}={v}" for k, v in fields.items()), **fields)


def cmd_build(args, out: _Out) -> int:
    if not args.tree:
        raise IsoClusterError("--tree is required")
    tree = STree(_config(args))
    tree.extend(_ingest(args, args.dim))
    io_.save_tree(tree, args.tree)
    _summary(tree, out)
    return 0


def cmd_insert(args, out: _Out) -> int:
    tree = _load(args)
    tree.extend(_ingest(args, tree.config.dim))
    io_.save_tree(tree, args.tree)
    _summary(tree, out)
    return 0


def cmd_knn(args, out: _Out) -> int:
    tree = _load(args)
    q = _query(args, tree)
    for p, d in tree.query_knn(q, args.k):
        text = io_.format_point(p)
        out.record(f"{text} {d!r}", point=text, distance=d)
    return 0


def cmd_range(args, out: _Out) -> int:
    tree = _load(args)
    q = _query(args, tree)
    for p, d in tree._range(q, args.radius):
        text = io_.format_point(p)
        out.record(f"{text} {d!r}", point=text, distance=d)
    return 0


def cmd_browse(args, out: _Out) -> int:
    tree = _load(args)
    q = _query(args, tree)
    for ball, stats in tree.browse(q, args.depth):
        dev = stats.deviation()
        digest = _digest(ball.center)
        out.record(
            f"{args.depth} {stats.n} {ball.radius!r} {dev!r} {digest}",
            depth=args.depth, n=stats.n, radius=ball.radius, deviation=dev, center=digest,
        )
    return 0


def cmd_delete(args, out: _Out) -> int:
    tree = _load(args)
    q = _query(args, tree)
    removed = tree.delete_ball(q, args.radius)
    io_.save_tree(tree, args.tree)
    out.record(f"deleted {removed}", deleted=removed)
    return 0


def cmd_stats(args, out: _Out) -> int:
    _summary(_load(args), out)
    return 0


def cmd_audit(args, out: _Out) -> int:
    report = _load(args).audit()
    out.record(str(report), violations=len(report.violations), details=report.violations)
    if args.format == "text":
        for v in report.violations:
            out.record(f"  {v}")
    return 0 if report.ok else 1


def cmd_vectorize(args, out: _Out) -> int:
    lex = Lexicon.load(args.lexicon) if args.lexicon else None
    for path in args.inputs:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        docs = text.splitlines() if args.per_line else [text]
        for doc in docs:
            p = vectorize(doc, lex)
            if p.nnz == 0:
                log.warning("%s: document without words skipped", path)
                continue
            pt = io_.format_point(p)
            out.record(pt, point=pt)
    return 0


def cmd_render(args, out: _Out) -> int:
    tree = _load(args)
    if args.mode == "dot":
        text = render_dot(tree)
    else:
        project = None
        if args.project:
            try:
                i, j = (int(x) for x in args.project.split(","))
            except ValueError:
                raise IsoClusterError("--project takes two indices, e.g. 0,1") from None
            project = (i, j)
        text = render_svg(tree, project)
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.stream.write(text)
    return 0


COMMANDS = {
    "build": cmd_build,
    "insert": cmd_insert,
    "knn": cmd_knn,
    "range": cmd_range,
    "browse": cmd_browse,
    "delete": cmd_delete,
    "stats": cmd_stats,
    "audit": cmd_audit,
    "vectorize": cmd_vectorize,
    "render": cmd_render,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, default=1024)
    common.add_argument("--capacity", type=int, default=16)
    common.add_argument("--split", choices=("greedy", "brute", "auto"), default="auto")
    common.add_argument("--tree", help="snapshot path")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--on-error", choices=("fail", "skip"), default="fail")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="isocluster", description="Ball-bounded clustering index.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("build", parents=[common], help="build a snapshot from point files")
    p.add_argument("inputs", nargs="*", default=["-"])
    p = sub.add_parser("insert", parents=[common], help="add points to a snapshot")
    p.add_argument("inputs", nargs="*", default=["-"])
    for name in ("knn", "range", "browse", "delete"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--query", "-q", required=True, help='point as "index:value ..."')
        if name == "knn":
            p.add_argument("-k", type=int, default=1)
        if name in ("range", "delete"):
            p.add_argument("--radius", "-r", type=float, required=True)
        if name == "browse":
            p.add_argument("--depth", type=int, default=0)
    sub.add_parser("stats", parents=[common])
    sub.add_parser("audit", parents=[common])
    p = sub.add_parser("vectorize", parents=[common], help="turn texts into points")
    p.add_argument("inputs", nargs="*", default=["-"])
    p.add_argument("--lexicon")
    p.add_argument("--per-line", action="store_true", help="one document per input line")
    p = sub.add_parser("render", parents=[common])
    p.add_argument("--mode", choices=("svg2d", "dot"), default="svg2d")
    p.add_argument("--project", help="coordinate pair i,j for svg2d")
    p.add_argument("-o", "--output")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    out = _Out(args.format)
    try:
        return COMMANDS[args.command](args, out)
    except (IsoClusterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
