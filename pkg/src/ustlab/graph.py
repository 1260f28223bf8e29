"""Finite weighted multigraphs with exact spanning-tree oracles.

Conductances may be ints, Fractions, or floats.  On small graphs every
probabilistic quantity (tree counts, edge marginals, effective
resistances) has an exact rational path, so downstream samplers can be
validated by equality rather than tolerance.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import (
    DisconnectedGraphError,
    EdgeNotFoundError,
    SolverError,
    TooLargeError,
)

__all__ = [
    "Edge",
    "WeightedGraph",
    "contract_edge",
    "effective_resistance",
    "effective_resistance_exact",
    "spanning_tree_count",
    "enumerate_spanning_trees",
    "edge_ust_probability",
    "edge_ust_probability_exact",
]

EXACT_RESISTANCE_MAX_VERTICES = 12
EXACT_COUNT_MAX_VERTICES = 16
ENUMERATION_MAX_VERTICES = 10


@dataclass(frozen=True)
class Edge:
    u: Hashable
    v: Hashable
    c: object = 1  # conductance, > 0
    label: Hashable = None

    def endpoints(self):
        return (self.u, self.v)

    def other(self, x):
        return self.v if x == self.u else self.u


class WeightedGraph:
    """Immutable multigraph with positive edge conductances.

    Parallel edges are kept distinct; self-loops are rejected.
    """

    def __init__(self, vertices: Iterable[Hashable], edges: Iterable):
        self.vertices = tuple(vertices)
        self._vindex = {v: i for i, v in enumerate(self.vertices)}
        if len(self._vindex) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        norm = []
        for k, e in enumerate(edges):
            if not isinstance(e, Edge):
                e = Edge(*e) if len(e) >= 3 else Edge(e[0], e[1])
            if e.u == e.v:
                raise ValueError(f"self-loop at {e.u!r}")
            if e.u not in self._vindex or e.v not in self._vindex:
                raise ValueError(f"edge endpoint not a vertex: {e}")
            if not e.c > 0:
                raise ValueError(f"non-positive conductance on {e}")
            if e.label is None:
                e = Edge(e.u, e.v, e.c, k)
            norm.append(e)
        self.edges = tuple(norm)
        self._adj: dict[Hashable, list[Edge]] = {v: [] for v in self.vertices}
        self._by_label: dict[Hashable, Edge] = {}
        for e in self.edges:
            self._adj[e.u].append(e)
            self._adj[e.v].append(e)
            self._by_label.setdefault(e.label, e)

    # -- basic queries ------------------------------------------------

    def __len__(self):
        return len(self.vertices)

    def incident(self, v) -> list[Edge]:
        return self._adj[v]

    def vertex_index(self, v) -> int:
        return self._vindex[v]

    def find_edge(self, e) -> Edge:
        """Resolve an edge given as Edge, label, or endpoint pair."""
        if isinstance(e, Edge):
            if e in self.edges:
                return e
            raise EdgeNotFoundError(e)
        if e in self._by_label:
            return self._by_label[e]
        if isinstance(e, tuple) and len(e) == 2 and e[0] in self._vindex:
            for cand in self._adj[e[0]]:
                if cand.other(e[0]) == e[1]:
                    return cand
        raise EdgeNotFoundError(e)

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            v = stack.pop()
            for e in self._adj[v]:
                w = e.other(v)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def total_conductance(self, u, v):
        """Sum of conductances over parallel edges between u and v."""
        return sum(e.c for e in self._adj[u] if e.other(u) == v)

    # -- Laplacian ----------------------------------------------------

    def laplacian_dense(self) -> np.ndarray:
        n = len(self.vertices)
        L = np.zeros((n, n))
        for e in self.edges:
            i, j = self._vindex[e.u], self._vindex[e.v]
            c = float(e.c)
            L[i, i] += c
            L[j, j] += c
            L[i, j] -= c
            L[j, i] -= c
        return L

    def _laplacian_exact(self) -> list[list[Fraction]]:
        n = len(self.vertices)
        L = [[Fraction(0)] * n for _ in range(n)]
        for e in self.edges:
            i, j = self._vindex[e.u], self._vindex[e.v]
            c = Fraction(e.c) if not isinstance(e.c, float) else Fraction(e.c).limit_denominator(10**15)
            L[i][i] += c
            L[j][j] += c
            L[i][j] -= c
            L[j][i] -= c
        return L

    # -- serialization ------------------------------------------------

    def to_json(self) -> str:
        def enc(c):
            if isinstance(c, Fraction):
                return {"num": c.numerator, "den": c.denominator}
            return c

        return json.dumps(
            {
                "vertices": [repr(v) for v in self.vertices],
                "edges": [
                    {"u": repr(e.u), "v": repr(e.v), "c": enc(e.c), "label": repr(e.label)}
                    for e in self.edges
                ],
            }
        )

    @staticmethod
    def from_json(text: str) -> "WeightedGraph":
        import ast

        data = json.loads(text)

        def dec(c):
            if isinstance(c, dict):
                return Fraction(c["num"], c["den"])
            return c

        vertices = [ast.literal_eval(v) for v in data["vertices"]]
        edges = [
            Edge(
                ast.literal_eval(e["u"]),
                ast.literal_eval(e["v"]),
                dec(e["c"]),
                ast.literal_eval(e["label"]),
            )
            for e in data["edges"]
        ]
        return WeightedGraph(vertices, edges)


# -- contraction -------------------------------------------------------


def contract_edge(g: WeightedGraph, e) -> WeightedGraph:
    """Merge the endpoints of e; drop resulting self-loops.

    Parallel edges toward a common neighbor are kept distinct, so total
    conductance adds as w(ss', s'') = w(s, s'') + w(s', s'').  The
    merged vertex reuses e.u's id.
    """
    e = g.find_edge(e)
    keep, gone = e.u, e.v
    vertices = [v for v in g.vertices if v != gone]
    edges = []
    for f in g.edges:
        u = keep if f.u == gone else f.u
        v = keep if f.v == gone else f.v
        if u == v:
            continue  # self-loop: e itself and any parallel copies
        edges.append(Edge(u, v, f.c, f.label))
    return WeightedGraph(vertices, edges)


def _identify(g: WeightedGraph, cls: Sequence, new_id) -> WeightedGraph:
    """Identify a vertex class into a single vertex, dropping self-loops."""
    cls = set(cls)
    vertices = [new_id] + [v for v in g.vertices if v not in cls]
    edges = []
    for f in g.edges:
        u = new_id if f.u in cls else f.u
        v = new_id if f.v in cls else f.v
        if u != v:
            edges.append(Edge(u, v, f.c, f.label))
    return WeightedGraph(vertices, edges)


# -- exact determinant helpers -----------------------------------------


def _det_fraction(m: list[list[Fraction]]) -> Fraction:
    """Fraction-pivot Gaussian elimination determinant."""
    n = len(m)
    m = [row[:] for row in m]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = Fraction(1) / m[col][col]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                factor = m[r][col] * inv
                for c in range(col, n):
                    m[r][c] -= factor * m[col][c]
    return det


# -- spanning tree oracles ---------------------------------------------


def spanning_tree_count(g: WeightedGraph):
    """Weighted spanning tree sum  Σ_T Π_{e∈T} c(e)  (matrix-tree).

    Exact (Fraction/int) below EXACT_COUNT_MAX_VERTICES with rational
    weights; float otherwise.
    """
    n = len(g.vertices)
    if n == 0:
        return 0
    if n == 1:
        return 1
    rational = all(not isinstance(e.c, float) for e in g.edges)
    if n <= EXACT_COUNT_MAX_VERTICES and rational:
        L = g._laplacian_exact()
        minor = [row[1:] for row in L[1:]]
        val = _det_fraction(minor)
        return int(val) if val.denominator == 1 else val
    L = g.laplacian_dense()
    sign, logdet = np.linalg.slogdet(L[1:, 1:])
    if sign <= 0:
        return 0.0
    return float(np.exp(logdet))


def enumerate_spanning_trees(g: WeightedGraph) -> list[tuple[tuple[Edge, ...], object]]:
    """All spanning trees with their weight products Π c(e).

    Guarded to small graphs; the sum of products equals
    spanning_tree_count exactly.
    """
    n = len(g.vertices)
    if n > ENUMERATION_MAX_VERTICES:
        raise TooLargeError(f"{n} vertices exceeds enumeration guard {ENUMERATION_MAX_VERTICES}")
    if n <= 1:
        return [((), 1)]
    out = []
    vi = g.vertex_index
    for combo in itertools.combinations(g.edges, n - 1):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for e in combo:
            a, b = find(vi(e.u)), find(vi(e.v))
            if a == b:
                ok = False
                break
            parent[a] = b
        if ok:
            w = 1
            for e in combo:
                w = w * e.c
            out.append((combo, w))
    return out


def effective_resistance_exact(g: WeightedGraph, e) -> Fraction:
    """R_eff between e's endpoints as a ratio of tree counts."""
    e = g.find_edge(e)
    if not g.is_connected():
        raise DisconnectedGraphError("effective resistance needs a connected graph")
    total = spanning_tree_count(g)
    merged = _identify(g, (e.u, e.v), e.u)
    return Fraction(spanning_tree_count(merged)) / Fraction(total)


def effective_resistance(g: WeightedGraph, e, tol: float = 1e-10) -> float:
    """Effective resistance across e's endpoints (e included).

    Exact matrix-tree ratio below EXACT_RESISTANCE_MAX_VERTICES with
    rational weights; grounded conjugate-gradient solve otherwise.
    """
    e = g.find_edge(e)
    if not g.is_connected():
        raise DisconnectedGraphError("effective resistance needs a connected graph")
    rational = all(not isinstance(f.c, float) for f in g.edges)
    if len(g.vertices) <= EXACT_RESISTANCE_MAX_VERTICES and rational:
        return float(effective_resistance_exact(g, e))
    n = len(g.vertices)
    i, j = g.vertex_index(e.u), g.vertex_index(e.v)
    L = scipy.sparse.csc_matrix(g.laplacian_dense())
    # ground vertex j: delete its row/column
    keep = [k for k in range(n) if k != j]
    Lg = L[np.ix_(keep, keep)]
    b = np.zeros(n - 1)
    b[keep.index(i)] = 1.0
    x, info = scipy.sparse.linalg.cg(Lg, b, rtol=tol, atol=0.0, maxiter=20 * n)
    if info != 0:
        raise SolverError(f"CG did not converge (info={info})")
    resid = np.linalg.norm(Lg @ x - b)
    if resid > max(tol, 1e-8):
        raise SolverError(f"residual {resid:.3e} above tolerance")
    return float(x[keep.index(i)])


def edge_ust_probability_exact(g: WeightedGraph, e) -> Fraction:
    """P(e ∈ weighted UST) = c(e) · T(G/e) / T(G), exact."""
    e = g.find_edge(e)
    if not g.is_connected():
        raise DisconnectedGraphError("UST probability needs a connected graph")
    total = Fraction(spanning_tree_count(g))
    contracted = Fraction(spanning_tree_count(contract_edge(g, e)))
    c = Fraction(e.c) if not isinstance(e.c, float) else Fraction(e.c).limit_denominator(10**15)
    return c * contracted / total


def edge_ust_probability(g: WeightedGraph, e) -> float:
    """Weighted fraction of spanning trees containing e.

    Satisfies edge_ust_probability = c(e) · effective_resistance within
    1e-9 (Kirchhoff).
    """
    e = g.find_edge(e)
    rational = all(not isinstance(f.c, float) for f in g.edges)
    if len(g.vertices) <= EXACT_COUNT_MAX_VERTICES and rational:
        return float(edge_ust_probability_exact(g, e))
    return float(e.c) * effective_resistance(g, e)
