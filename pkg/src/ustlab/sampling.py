"""Random walks, loop erasure, Wilson's algorithm, and dual trees.

Samplers are pure functions of (graph, generator state).  Large lattice
domains are routed through compiled kernels; small or weighted graphs
use the generic Python path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import ComponentError, PreconditionError, UnreachableTargetError
from .graph import WeightedGraph
from .lattice import WIRED, LatticeDomain
from .rng import kernel_seed

__all__ = [
    "LerwPath",
    "SpanningForest",
    "loop_erased_walk",
    "wilson_ust",
    "boundary_ust",
    "dual_tree",
    "tree_branch",
]

LENGTH_EXPONENT = 5.0 / 4.0
_KERNEL_THRESHOLD = 64  # vertices; above this boundary_ust uses compiled Wilson


@dataclass
class LerwPath:
    """A simple path left by chronological loop erasure."""

    vertices: list
    steps_of_walk: int
    mesh: float = 1.0

    @property
    def edge_count(self) -> int:
        return max(len(self.vertices) - 1, 0)

    @property
    def renormalized_length(self) -> float:
        return self.edge_count * self.mesh**LENGTH_EXPONENT

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("loop-erased path has a repeated vertex")


class SpanningForest:
    """An acyclic edge subset of a host graph with component bookkeeping."""

    def __init__(self, graph: WeightedGraph, tree_edges, host: LatticeDomain | None = None):
        self.graph = graph
        self.tree_edges = frozenset(tree_edges)
        self.host = host
        self.mesh = host.mesh if host is not None else 1.0
        self._components = None
        self._comp_of = None

    # -- component bookkeeping ---------------------------------------

    def _compute_components(self):
        parent = {v: v for v in self.graph.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for lab in self.tree_edges:
            e = self.graph.find_edge(lab)
            a, b = find(e.u), find(e.v)
            if a == b:
                raise ValueError("edge set contains a cycle")
            parent[a] = b
        groups: dict = {}
        for v in self.graph.vertices:
            groups.setdefault(find(v), []).append(v)
        self._components = tuple(frozenset(g) for g in sorted(groups.values(), key=lambda g: repr(sorted(g, key=repr))))
        self._comp_of = {v: i for i, comp in enumerate(self._components) for v in comp}

    @property
    def components(self) -> tuple:
        if self._components is None:
            self._compute_components()
        return self._components

    def component_of(self, v) -> int:
        if self._comp_of is None:
            self._compute_components()
        if v not in self._comp_of:
            raise ComponentError(f"unknown vertex {v!r}")
        return self._comp_of[v]

    def component_positions(self, cid: int):
        """Physical positions of a component's lattice vertices."""
        comp = self.components[cid]
        if self.host is not None:
            return [self.host.position(v) for v in comp if isinstance(v, tuple)]
        return [v for v in comp if isinstance(v, tuple) and len(v) == 2]

    def component_size(self, cid: int) -> int:
        return len(self.components[cid])

    def component_diameter(self, cid: int) -> float:
        """Euclidean diameter of a component; 0 for single vertices.

        Exact pairwise max below 1000 vertices, convex hull above.
        """
        pts = self.component_positions(cid)
        if len(pts) < 2:
            return 0.0
        if len(pts) > 1000:
            from scipy.spatial import ConvexHull

            arr = np.asarray(pts, dtype=float)
            hull = arr[ConvexHull(arr).vertices]
            pts = [tuple(p) for p in hull]
        best = 0.0
        for i in range(len(pts)):
            xi, yi = pts[i]
            for j in range(i + 1, len(pts)):
                d = math.hypot(xi - pts[j][0], yi - pts[j][1])
                if d > best:
                    best = d
        return best

    def component_bbox(self, cid: int):
        pts = self.component_positions(cid)
        if not pts:
            return None
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        return (min(xs), min(ys), max(xs), max(ys))

    def is_spanning_tree(self) -> bool:
        return (
            len(self.tree_edges) == len(self.graph.vertices) - 1
            and len(self.components) == 1
        )

    def adjacency(self) -> dict:
        adj: dict = {v: [] for v in self.graph.vertices}
        for lab in self.tree_edges:
            e = self.graph.find_edge(lab)
            adj[e.u].append((e.v, lab))
            adj[e.v].append((e.u, lab))
        return adj

    def edge_list_json(self) -> str:
        import json

        return json.dumps(sorted((repr(lab) for lab in self.tree_edges)))


# -- random walk / loop erasure -------------------------------------------


def _step(g: WeightedGraph, v, rng) -> tuple:
    """One conductance-proportional step from v; returns the new vertex."""
    inc = g.incident(v)
    if len(inc) == 1:
        return inc[0].other(v)
    weights = np.array([float(e.c) for e in inc])
    total = weights.sum()
    u = rng.random() * total
    acc = 0.0
    for e, w in zip(inc, weights):
        acc += w
        if u < acc:
            return e.other(v)
    return inc[-1].other(v)


def loop_erased_walk(g: WeightedGraph, start, targets, rng) -> LerwPath:
    """Chronological loop erasure of a weighted walk stopped on targets."""
    targets = set(targets)
    if not targets:
        raise PreconditionError("target set is empty")
    if start in targets:
        return LerwPath([start], 0)
    # reachability check
    seen = {start}
    stack = [start]
    reachable = False
    while stack:
        v = stack.pop()
        if v in targets:
            reachable = True
            break
        for e in g.incident(v):
            w = e.other(v)
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if not reachable:
        raise UnreachableTargetError(f"targets unreachable from {start!r}")
    path = [start]
    last = {start: 0}
    steps = 0
    v = start
    while v not in targets:
        v = _step(g, v, rng)
        steps += 1
        if v in last:
            cut = last[v]
            for u in path[cut + 1 :]:
                del last[u]
            del path[cut + 1 :]
        else:
            last[v] = len(path)
            path.append(v)
    return LerwPath(path, steps)


# -- Wilson's algorithm ----------------------------------------------------


def wilson_ust(g: WeightedGraph, root, vertex_order=None, rng=None) -> SpanningForest:
    """Weighted UST via Wilson's algorithm, P(T) ∝ Π_{e∈T} c(e).

    The law does not depend on vertex_order (samples do); the default
    order is a deterministic sort of the vertex ids.
    """
    if rng is None:
        raise PreconditionError("rng is required")
    if vertex_order is None:
        vertex_order = sorted(g.vertices, key=repr)
    intree = {root}
    nxt: dict = {}
    for v0 in vertex_order:
        v = v0
        while v not in intree:
            nxt[v] = _step(g, v, rng)
            v = nxt[v]
        v = v0
        while v not in intree:
            intree.add(v)
            v = nxt[v]
    if len(intree) != len(g.vertices):
        from .errors import DisconnectedGraphError

        raise DisconnectedGraphError("Wilson did not span: graph disconnected")
    labels = set()
    for v, w in nxt.items():
        if v in intree:
            # pick the concrete edge v-w proportionally to conductance
            cands = [e for e in g.incident(v) if e.other(v) == w]
            if len(cands) == 1:
                labels.add(cands[0].label)
            else:
                weights = [float(e.c) for e in cands]
                tot = sum(weights)
                u = rng.random() * tot
                acc = 0.0
                chosen = cands[-1]
                for e, wt in zip(cands, weights):
                    acc += wt
                    if u < acc:
                        chosen = e
                        break
                labels.add(chosen.label)
    return SpanningForest(g, labels)


def _lattice_csr(d: LatticeDomain):
    """CSR arrays of the effective graph, cached on the domain."""
    cached = getattr(d, "_csr_cache", None)
    if cached is not None:
        return cached
    g = d.effective_graph
    verts = sorted(g.vertices, key=repr)
    vidx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    deg = np.zeros(n + 1, dtype=np.int64)
    for e in g.edges:
        deg[vidx[e.u] + 1] += 1
        deg[vidx[e.v] + 1] += 1
    indptr = np.cumsum(deg)
    indices = np.empty(indptr[-1], dtype=np.int64)
    eid = np.empty(indptr[-1], dtype=np.int64)
    fill = indptr[:-1].copy()
    labels = [e.label for e in g.edges]
    for k, e in enumerate(g.edges):
        i, j = vidx[e.u], vidx[e.v]
        indices[fill[i]] = j
        eid[fill[i]] = k
        fill[i] += 1
        indices[fill[j]] = i
        eid[fill[j]] = k
        fill[j] += 1
    norms = np.array(
        [d.norm(v) if isinstance(v, tuple) and len(v) == 2 and isinstance(v[0], (int, np.integer)) else np.inf for v in verts]
    )
    cache = {
        "graph": g,
        "verts": verts,
        "vidx": vidx,
        "indptr": indptr,
        "indices": indices,
        "eid": eid,
        "labels": labels,
        "norms": norms,
        "eu": np.array([vidx[e.u] for e in g.edges], dtype=np.int64),
        "ev": np.array([vidx[e.v] for e in g.edges], dtype=np.int64),
    }
    d._csr_cache = cache
    return cache


def _wilson_lattice_nxt(d: LatticeDomain, rng, root=None):
    """Compiled Wilson on a lattice domain; returns (cache, nxt array, root idx)."""
    cache = _lattice_csr(d)
    verts = cache["verts"]
    if root is None:
        root = WIRED if WIRED in cache["vidx"] else verts[0]
    r = cache["vidx"][root]
    order = np.arange(len(verts), dtype=np.int64)
    seed = np.uint64(kernel_seed(int(rng.integers(0, 2**63 - 1))))
    nxt = _kernels.wilson_csr(cache["indptr"], cache["indices"], order, r, seed)
    return cache, nxt, r


def _nxt_to_labels(cache, nxt, r):
    vidx_inv = cache["verts"]
    labels = set()
    lab_by_pair = {}
    g = cache["graph"]
    for e in g.edges:
        a, b = cache["vidx"][e.u], cache["vidx"][e.v]
        lab_by_pair[(a, b)] = e.label
        lab_by_pair[(b, a)] = e.label
    for v in range(len(vidx_inv)):
        if v != r:
            labels.add(lab_by_pair[(v, int(nxt[v]))])
    return labels


def boundary_ust(d: LatticeDomain, rng) -> SpanningForest:
    """UST of a domain under its boundary condition.

    Wired (and whole-plane-box): Wilson rooted at the identified
    boundary vertex.  Free: Wilson rooted at a fixed interior vertex of
    the unmodified graph.
    """
    g = d.effective_graph
    if d.bc in ("wired", "whole-plane-box") and d.boundary_vertices:
        root = WIRED if WIRED in g._vindex else next(iter(d.boundary_vertices))
    else:
        root = sorted(g.vertices, key=repr)[0]
    if len(g.vertices) > _KERNEL_THRESHOLD:
        cache, nxt, r = _wilson_lattice_nxt(d, rng, root)
        return SpanningForest(g, _nxt_to_labels(cache, nxt, r), host=d)
    f = wilson_ust(g, root, rng=rng)
    return SpanningForest(g, f.tree_edges, host=d)


# -- dual trees and branches -----------------------------------------------


def dual_tree(f: SpanningForest, d: LatticeDomain) -> SpanningForest:
    """Complementary dual spanning tree {e*: e ∉ f} on the dual domain."""
    if not f.is_spanning_tree():
        raise PreconditionError("dual_tree requires a spanning tree")
    dual = d.dual
    g = d.effective_graph
    dual_labels = {
        d.dual_bijection[e.label] for e in g.edges if e.label not in f.tree_edges
    }
    result = SpanningForest(dual.effective_graph, dual_labels, host=dual)
    assert result.is_spanning_tree(), "planar duality violated: complement not a dual spanning tree"
    return result


def tree_branch(f: SpanningForest, z0, z1) -> LerwPath:
    """The unique tree path z0..z1 with renormalized length."""
    if f.component_of(z0) != f.component_of(z1):
        raise ComponentError(f"{z0!r} and {z1!r} lie in different components")
    if z0 == z1:
        return LerwPath([z0], 0, mesh=f.mesh)
    adj = f.adjacency()
    prev = {z0: None}
    queue = [z0]
    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        if v == z1:
            break
        for w, _lab in adj[v]:
            if w not in prev:
                prev[w] = v
                queue.append(w)
    path = [z1]
    while path[-1] != z0:
        path.append(prev[path[-1]])
    path.reverse()
    return LerwPath(path, 0, mesh=f.mesh)
