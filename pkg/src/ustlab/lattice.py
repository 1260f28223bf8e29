"""Discretized 2-D lattice domains, their planar duals, and annulus geometry.

Vertices are integer lattice coordinates; physical positions are coords
times the mesh.  The dual is built by merging unit squares across
missing primal edges, so it is correct for any induced subgraph of Z^2
(outer face becomes an explicit super-vertex).
"""

from __future__ import annotations

import json
import math
from collections import namedtuple
from functools import cached_property

from .errors import DomainTooSmallError, GeometryError, PreconditionError
from .graph import Edge, WeightedGraph

__all__ = [
    "OUTER",
    "WIRED",
    "DomainEdge",
    "LatticeDomain",
    "build_box_domain",
    "build_rect_domain",
    "build_disc_domain",
    "annulus_rings",
]

OUTER = "outer"  # dual super-vertex for the unbounded face
WIRED = "wired"  # identified boundary vertex in effective graphs

DomainEdge = namedtuple("DomainEdge", ["u", "v", "label"])


def _edge_label(a, b):
    return (a, b) if a <= b else (b, a)


class LatticeDomain:
    """A finite piece of delta*Z^2 (or its dual) with boundary metadata."""

    def __init__(self, mesh, vertices, edges, boundary_vertices, bc, positions=None, meta=None):
        self.mesh = float(mesh)
        self.vertices = frozenset(vertices)
        self.edges = tuple(edges)
        self.edge_set = frozenset(e.label for e in self.edges)
        self.boundary_vertices = frozenset(boundary_vertices)
        self.bc = bc
        # lattice-unit positions; dual faces sit at half-integer offsets
        self._positions = positions or {}
        self.meta = meta or {}
        self._dual = None
        self.dual_bijection = None  # label -> dual label

    def position(self, v):
        """Physical (x, y) of a vertex; OUTER has no position."""
        if v in self._positions:
            x, y = self._positions[v]
        else:
            x, y = v
        return (x * self.mesh, y * self.mesh)

    def norm(self, v) -> float:
        x, y = self.position(v)
        return math.hypot(x, y)

    @cached_property
    def effective_graph(self) -> WeightedGraph:
        """Unit-conductance WeightedGraph with wired identification applied."""
        wired = self.bc in ("wired", "whole-plane-box") and self.boundary_vertices
        vmap = {}
        for v in self.vertices:
            vmap[v] = WIRED if (wired and v in self.boundary_vertices) else v
        verts = []
        seen = set()
        for v in self.vertices:
            if vmap[v] not in seen:
                seen.add(vmap[v])
                verts.append(vmap[v])
        edges = []
        for e in self.edges:
            u, v = vmap[e.u], vmap[e.v]
            if u != v:
                edges.append(Edge(u, v, 1, e.label))
        return WeightedGraph(sorted(verts, key=repr), edges)

    @property
    def dual(self) -> "LatticeDomain":
        if self._dual is None:
            _build_dual(self)
        return self._dual

    # -- serialization -------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({"mesh": self.mesh, "bc": self.bc, **self.meta})

    @staticmethod
    def from_json(text: str) -> "LatticeDomain":
        data = json.loads(text)
        if data.get("kind") == "box":
            return build_box_domain(data["n"], data["mesh"], data["bc"])
        if data.get("kind") == "rect":
            return build_rect_domain(data["nx"], data["ny"], data["mesh"], data["bc"])
        if data.get("kind") == "disc":
            return build_disc_domain(data["R"], data["mesh"], data["bc"])
        raise PreconditionError(f"unknown domain kind in {text!r}")


def _induced_domain(coords, mesh, bc, meta):
    coords = set(coords)
    edges = []
    for (x, y) in coords:
        for (nx, ny) in ((x + 1, y), (x, y + 1)):
            if (nx, ny) in coords:
                a, b = (x, y), (nx, ny)
                edges.append(DomainEdge(a, b, _edge_label(a, b)))
    degree = {v: 0 for v in coords}
    for e in edges:
        degree[e.u] += 1
        degree[e.v] += 1
    boundary = frozenset(v for v in coords if degree[v] < 4)
    return LatticeDomain(mesh, coords, edges, boundary, bc, meta=meta)


def build_box_domain(half_width: int, mesh: float, bc: str = "free") -> LatticeDomain:
    """(2n+1) x (2n+1) grid centered at the origin."""
    n = int(half_width)
    if n < 1:
        raise DomainTooSmallError("box half-width must be >= 1")
    if mesh <= 0:
        raise PreconditionError("mesh must be positive")
    if bc not in ("wired", "free", "whole-plane-box"):
        raise PreconditionError(f"unknown boundary condition {bc!r}")
    coords = [(x, y) for x in range(-n, n + 1) for y in range(-n, n + 1)]
    d = _induced_domain(coords, mesh, bc, {"kind": "box", "n": n})
    # box boundary = outer ring
    ring = frozenset(v for v in d.vertices if max(abs(v[0]), abs(v[1])) == n)
    d.boundary_vertices = ring
    return d


def build_rect_domain(nx: int, ny: int, mesh: float = 1.0, bc: str = "free") -> LatticeDomain:
    """nx x ny grid graph (nx, ny = vertex counts per side)."""
    if nx < 1 or ny < 1 or nx * ny < 2:
        raise DomainTooSmallError("rectangle needs at least two vertices")
    if mesh <= 0:
        raise PreconditionError("mesh must be positive")
    if bc not in ("wired", "free", "whole-plane-box"):
        raise PreconditionError(f"unknown boundary condition {bc!r}")
    coords = [(x, y) for x in range(nx) for y in range(ny)]
    return _induced_domain(coords, mesh, bc, {"kind": "rect", "nx": nx, "ny": ny})


def build_disc_domain(radius: float, mesh: float, bc: str = "free") -> LatticeDomain:
    """Connected component of {v in delta*Z^2 : |v| < R} containing 0."""
    if mesh <= 0:
        raise PreconditionError("mesh must be positive")
    if bc not in ("wired", "free", "whole-plane-box"):
        raise PreconditionError(f"unknown boundary condition {bc!r}")
    r = radius / mesh
    m = int(math.ceil(r))
    inside = {
        (x, y)
        for x in range(-m, m + 1)
        for y in range(-m, m + 1)
        if math.hypot(x, y) < r
    }
    if (0, 0) not in inside or len(inside) < 2:
        raise DomainTooSmallError(f"radius {radius} too small at mesh {mesh}")
    # connected component of the origin
    comp = {(0, 0)}
    stack = [(0, 0)]
    while stack:
        x, y = stack.pop()
        for nb in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if nb in inside and nb not in comp:
                comp.add(nb)
                stack.append(nb)
    if len(comp) < 2:
        raise DomainTooSmallError(f"radius {radius} too small at mesh {mesh}")
    return _induced_domain(comp, mesh, bc, {"kind": "disc", "R": radius})


# -- planar dual ---------------------------------------------------------


def _build_dual(d: LatticeDomain) -> None:
    """Construct the dual domain and the primal<->dual edge bijection.

    Faces are found by union-find over unit squares: two squares merge
    when the primal edge between them is absent; the ring of squares
    just outside the bounding box seeds the outer face.
    """
    xs = [v[0] for v in d.vertices]
    ys = [v[1] for v in d.vertices]
    x0, x1 = min(xs) - 1, max(xs)
    y0, y1 = min(ys) - 1, max(ys)
    squares = [(i, j) for i in range(x0, x1 + 1) for j in range(y0, y1 + 1)]
    parent = {s: s for s in squares}
    parent[OUTER] = OUTER

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            if rb == OUTER:
                ra, rb = rb, ra
            parent[rb] = ra

    edge_set = d.edge_set
    for (i, j) in squares:
        # right neighbor across vertical primal edge (i+1,j)-(i+1,j+1)
        right = (i + 1, j)
        if _edge_label((i + 1, j), (i + 1, j + 1)) not in edge_set:
            union((i, j), right if right in parent else OUTER)
        # top neighbor across horizontal primal edge (i,j+1)-(i+1,j+1)
        top = (i, j + 1)
        if _edge_label((i, j + 1), (i + 1, j + 1)) not in edge_set:
            union((i, j), top if top in parent else OUTER)
        if i == x0 or j == y0:
            # left/bottom side is beyond the range: outside the domain
            if _edge_label((i, j), (i, j + 1)) not in edge_set:
                union((i, j), OUTER)
            if _edge_label((i, j), (i + 1, j)) not in edge_set:
                union((i, j), OUTER)

    wired_primal = d.bc in ("wired", "whole-plane-box")
    dual_edges = []
    bijection = {}
    for e in d.edges:
        (ax, ay), (bx, by) = e.u, e.v
        if ax == bx:  # vertical edge: faces left/right
            s1, s2 = (ax - 1, min(ay, by)), (ax, min(ay, by))
        else:  # horizontal edge: faces below/above
            s1, s2 = (min(ax, bx), ay - 1), (min(ax, bx), ay)
        r1 = find(s1) if s1 in parent else OUTER
        r2 = find(s2) if s2 in parent else OUTER
        if wired_primal and e.u in d.boundary_vertices and e.v in d.boundary_vertices:
            continue  # self-loop of the wired primal: no dual partner
        label = ("*", e.label)
        dual_edges.append(DomainEdge(r1, r2, label))
        bijection[e.label] = label

    dual_vertices = set()
    for e in dual_edges:
        dual_vertices.add(e.u)
        dual_vertices.add(e.v)
    if not wired_primal:
        dual_vertices.add(OUTER)
    positions = {v: (v[0] + 0.5, v[1] + 0.5) for v in dual_vertices if v != OUTER}
    dual_bc = "free" if wired_primal else "wired"
    dual = LatticeDomain(
        d.mesh,
        dual_vertices,
        dual_edges,
        frozenset({OUTER}) if dual_bc == "wired" else frozenset(),
        dual_bc,
        positions=positions,
        meta={"kind": "dual", "of": d.meta},
    )
    dual.edge_set = frozenset(e.label for e in dual_edges)
    dual._dual = d
    dual.dual_bijection = {lab: p for p, lab in bijection.items()}
    d._dual = dual
    d.dual_bijection = bijection


def annulus_rings(d: LatticeDomain, inner: float, outer: float):
    """Vertex rings at norms [L, L+mesh) and [N, N+mesh), plus annulus edges."""
    if not (0 < inner < outer):
        raise PreconditionError(f"need 0 < L < N, got L={inner}, N={outer}")
    delta = d.mesh
    inner_ring = {v for v in d.vertices if v != OUTER and inner <= d.norm(v) < inner + delta}
    outer_ring = {v for v in d.vertices if v != OUTER and outer <= d.norm(v) < outer + delta}
    if not inner_ring or not outer_ring:
        raise GeometryError(f"empty ring for L={inner}, N={outer}")
    # B(0, N) must sit inside the domain
    m = int(math.floor(outer / delta))
    for x in range(-m, m + 1):
        for y in range(-m, m + 1):
            if math.hypot(x, y) * delta <= outer and (x, y) not in d.vertices:
                raise GeometryError(f"B(0,{outer}) not contained in the domain")
    annulus_edges = {
        e.label
        for e in d.edges
        if inner <= d.norm(e.u) <= outer and inner <= d.norm(e.v) <= outer
    }
    return inner_ring, outer_ring, annulus_edges
