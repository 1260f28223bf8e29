"""Deterministic SVG rendering of forests, dual trees, and structure graphs.

Clusters are colored by a hash of their component representative;
dual-tree edges are dashed; structure-graph edges are drawn with
thickness proportional to their weight.  Output is stable: identical
inputs produce byte-identical documents.
"""

from __future__ import annotations

import hashlib
import math

from .lattice import OUTER, WIRED, LatticeDomain
from .sampling import SpanningForest
from .structure import StructureGraph

__all__ = ["render_forest", "render_structure", "render_svg"]

_MARGIN = 1.0


def _fmt(x: float) -> str:
    return f"{x:.4f}".rstrip("0").rstrip(".")


def _component_color(key) -> str:
    h = hashlib.sha256(repr(key).encode()).digest()
    # keep colors in a readable mid-dark band
    r, g, b = (60 + h[0] % 160, 60 + h[1] % 160, 60 + h[2] % 160)
    return f"#{r:02x}{g:02x}{b:02x}"


def _positions(domain: LatticeDomain, vertices):
    pts = {}
    for v in vertices:
        if v in (WIRED, OUTER):
            continue
        pts[v] = domain.position(v)
    return pts


class _Canvas:
    def __init__(self, xs, ys, scale=24.0):
        self.minx, self.maxx = min(xs) - _MARGIN, max(xs) + _MARGIN
        self.miny, self.maxy = min(ys) - _MARGIN, max(ys) + _MARGIN
        self.scale = scale
        self.width = (self.maxx - self.minx) * scale
        self.height = (self.maxy - self.miny) * scale
        self.parts = []

    def map(self, p):
        x, y = p
        return ((x - self.minx) * self.scale, (self.maxy - y) * self.scale)

    def line(self, a, b, color, width, dashed=False):
        (x1, y1), (x2, y2) = self.map(a), self.map(b)
        dash = ' stroke-dasharray="4,3"' if dashed else ""
        self.parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="{color}" stroke-width="{_fmt(width)}" stroke-linecap="round"{dash}/>'
        )

    def dot(self, p, color, r=2.0):
        x, y = self.map(p)
        self.parts.append(
            f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" fill="{color}"/>'
        )

    def text(self, p, s, size=10):
        x, y = self.map(p)
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
            f'font-family="monospace" text-anchor="middle">{s}</text>'
        )

    def document(self) -> str:
        body = "\n".join(self.parts)
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{_fmt(self.width)}" height="{_fmt(self.height)}" '
            f'viewBox="0 0 {_fmt(self.width)} {_fmt(self.height)}">\n'
            f'<rect width="100%" height="100%" fill="white"/>\n{body}\n</svg>\n'
        )


def render_forest(forest: SpanningForest, dual: SpanningForest | None = None) -> str:
    """Lattice forest as SVG; one color per component, dual edges dashed."""
    d = forest.host
    pts = _positions(d, forest.graph.vertices)
    xs = [p[0] for p in pts.values()] or [0.0]
    ys = [p[1] for p in pts.values()] or [0.0]
    canvas = _Canvas(xs, ys, scale=24.0 / d.mesh)
    g = forest.graph
    colors = {}
    for v in sorted(pts, key=repr):
        rep = forest.component_of(v)
        colors.setdefault(rep, _component_color(rep))
    for lab in sorted(forest.tree_edges, key=repr):
        e = g.find_edge(lab)
        if e.u in pts and e.v in pts:
            canvas.line(pts[e.u], pts[e.v], colors[forest.component_of(e.u)], 2.2)
    if dual is not None:
        dd = dual.host
        dpts = _positions(dd, dd.vertices)
        dg = dual.graph
        for lab in sorted(dual.tree_edges, key=repr):
            e = dg.find_edge(lab)
            if e.u in dpts and e.v in dpts:
                canvas.line(dpts[e.u], dpts[e.v], "#888888", 1.2, dashed=True)
    for v in sorted(pts, key=repr):
        canvas.dot(pts[v], colors[forest.component_of(v)], r=1.6)
    return canvas.document()


def _circle_layout(names):
    n = len(names)
    out = {}
    for i, s in enumerate(names):
        ang = 2 * math.pi * i / max(n, 1)
        out[s] = (math.cos(ang), math.sin(ang))
    return out


def render_structure(S: StructureGraph) -> str:
    """Structure graph as SVG: sites on a circle (area ∝ cluster size),
    edges with thickness proportional to weight."""
    names = sorted(S.sites, key=repr)
    if not names:
        raise ValueError("empty structure graph")
    layout = _circle_layout(names)
    canvas = _Canvas([-1.4, 1.4], [-1.4, 1.4], scale=160.0)
    wmax = max((m for _, m in S.edge_items()), default=1)
    for (a, b), m in S.edge_items():
        canvas.line(layout[a], layout[b], "#555555", 0.8 + 5.0 * m / wmax)
    maxsize = max(S.sites[s].size for s in names)
    for s in names:
        r = 4.0 + 10.0 * math.sqrt(S.sites[s].size / maxsize)
        canvas.dot(layout[s], _component_color(s), r=r)
        x, y = layout[s]
        canvas.text((x * 1.18, y * 1.18), str(S.sites[s].size))
    return canvas.document()


def render_svg(artifact) -> str:
    """Render a forest, (forest, dual) pair, or structure graph."""
    if isinstance(artifact, SpanningForest):
        return render_forest(artifact)
    if isinstance(artifact, StructureGraph):
        return render_structure(artifact)
    if isinstance(artifact, tuple) and len(artifact) == 2:
        return render_forest(artifact[0], artifact[1])
    raise TypeError(f"cannot render {type(artifact).__name__}")
