"""Static drawings of a tree: nested circles in SVG or a DOT graph."""

from __future__ import annotations

from typing import Optional

from .errors import DimensionError
from .sparse_point import SparsePoint, get
from .stree import STree

CANVAS = 800
MARGIN = 20


def _xy(p: SparsePoint, axes: tuple[int, int]) -> tuple[float, float]:
    return get(p, axes[0]), get(p, axes[1])


def render_svg(tree: STree, project: Optional[tuple[int, int]] = None) -> str:
    """Circles per node, darker for levels nearer the root, plus points.

    Higher-dimensional trees need ``project``, a pair of coordinate
    indices; a ball's projection never exceeds its radius, so the drawn
    circles still enclose the drawn points.
    """
    if project is None:
        if tree.config.dim != 2:
            raise DimensionError(f"svg2d needs a 2-D tree or a projection (dim={tree.config.dim})")
        project = (0, 1)
    for axis in project:
        if not 0 <= axis < tree.config.dim:
            raise DimensionError(f"projection axis {axis} outside [0, {tree.config.dim})")

    nodes = list(tree.nodes())
    points = list(tree)
    xs, ys = [], []
    for _, node in nodes:
        x, y = _xy(node.ball.center, project)
        r = node.ball.radius
        xs += [x - r, x + r]
        ys += [y - r, y + r]
    for p in points:
        x, y = _xy(p, project)
        xs.append(x)
        ys.append(y)
    if xs:
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    else:
        x0 = y0 = 0.0
        x1 = y1 = 1.0
    span = max(x1 - x0, y1 - y0) or 1.0
    k = (CANVAS - 2 * MARGIN) / span

    def tx(x: float) -> float:
        return MARGIN + (x - x0) * k

    def ty(y: float) -> float:
        return CANVAS - MARGIN - (y - y0) * k

    levels = max(1, tree.height - 1)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{CANVAS}" height="{CANVAS}" '
        f'viewBox="0 0 {CANVAS} {CANVAS}">',
        f'<rect width="{CANVAS}" height="{CANVAS}" fill="white"/>',
    ]
    for depth, node in nodes:
        gray = int(round(200 * min(depth, levels) / levels))
        x, y = _xy(node.ball.center, project)
        lines.append(
            f'<circle class="node" data-depth="{depth}" data-n="{node.stats.n}" '
            f'cx="{tx(x):.3f}" cy="{ty(y):.3f}" r="{node.ball.radius * k:.3f}" fill="none" '
            f'stroke="rgb({gray},{gray},{gray})" stroke-width="{max(0.5, 2.5 - 0.5 * depth):.1f}"/>'
        )
    for p in points:
        x, y = _xy(p, project)
        lines.append(f'<circle class="point" cx="{tx(x):.3f}" cy="{ty(y):.3f}" r="2" fill="crimson"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_dot(tree: STree) -> str:
    lines = ["digraph stree {", "  node [shape=box];"]
    parents: dict[int, str] = {}
    for i, (_, node) in enumerate(tree.nodes()):
        name = f"n{i}"
        kind = "leaf" if node.leaf else "inner"
        lines.append(f'  {name} [label="{kind} n={node.stats.n} r={node.ball.radius:.6g}"];')
        if id(node) in parents:
            lines.append(f"  {parents[id(node)]} -> {name};")
        if not node.leaf:
            for c in node.entries:
                parents[id(c)] = name
    lines.append("}")
    return "\n".join(lines) + "\n"
