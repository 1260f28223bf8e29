"""Cluster-level structure graphs and the gluing Markov chain.

A forest's structure graph has one site per component; an edge between
adjacent components carries integer multiplicity m (lattice edges
between them) and weight w = m * mesh^(5/4).  Multiplicities are the
exact bookkeeping unit, so the weight-addition collapse rule holds
bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    DisconnectedGraphError,
    EdgeNotFoundError,
    PreconditionError,
    TooLargeError,
)
from .graph import (
    WeightedGraph,
    contract_edge,
    effective_resistance,
    effective_resistance_exact,
)
from .sampling import LENGTH_EXPONENT, SpanningForest, wilson_ust

__all__ = [
    "Site",
    "StructureGraph",
    "GluingTrajectory",
    "GlueEvent",
    "extract_structure_graph",
    "truncate",
    "collapse",
    "glue_uniform",
    "glue_homogeneous",
    "glue_resistance_rates",
    "RESISTANCE_CHAIN_MAX_VERTICES",
]

RESISTANCE_CHAIN_MAX_VERTICES = 400


@dataclass(frozen=True)
class Site:
    size: int
    diameter: float
    rep: object
    vertices: frozenset | None = None


class StructureGraph:
    """Weighted cluster graph; weights are multiplicity * mesh^(5/4)."""

    def __init__(self, mesh: float, sites: dict, multiplicities: dict):
        self.mesh = float(mesh)
        self.sites = dict(sites)  # site id -> Site
        self.multiplicities = {}  # (a, b) sorted pair -> int m
        for (a, b), m in multiplicities.items():
            if a == b:
                raise ValueError("structure graph has no self-edges")
            key = (a, b) if repr(a) <= repr(b) else (b, a)
            self.multiplicities[key] = self.multiplicities.get(key, 0) + m

    @property
    def weight_unit(self) -> float:
        return self.mesh**LENGTH_EXPONENT

    def weight(self, a, b) -> float:
        key = (a, b) if repr(a) <= repr(b) else (b, a)
        return self.multiplicities.get(key, 0) * self.weight_unit

    def edge_items(self):
        return sorted(self.multiplicities.items(), key=lambda kv: repr(kv[0]))

    def __len__(self):
        return len(self.sites)

    def as_weighted_graph(self) -> WeightedGraph:
        """Sites with conductance = multiplicity (weights up to the
        common mesh factor, which cancels in the spanning-tree law)."""
        return WeightedGraph(
            sorted(self.sites, key=repr),
            [(a, b, m, (a, b)) for (a, b), m in self.edge_items()],
        )

    def is_connected(self) -> bool:
        return self.as_weighted_graph().is_connected()

    def to_json(self) -> str:
        import json

        return json.dumps(
            {
                "mesh": self.mesh,
                "sites": [
                    {"id": repr(s), "size": st.size, "diameter": st.diameter}
                    for s, st in sorted(self.sites.items(), key=lambda kv: repr(kv[0]))
                ],
                "edges": [
                    {"a": repr(a), "b": repr(b), "m": m, "w": m * self.weight_unit}
                    for (a, b), m in self.edge_items()
                ],
            }
        )


@dataclass(frozen=True)
class GlueEvent:
    time: float
    pair: tuple  # structure edge opened
    multiplicity: int
    sizes: tuple  # vertex counts of the two merged sites


@dataclass
class GluingTrajectory:
    initial: StructureGraph
    events: list  # of GlueEvent, strictly increasing times
    clock_scheme: str
    final: StructureGraph

    def __post_init__(self):
        times = [e.time for e in self.events]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("event times must be strictly increasing")


def extract_structure_graph(f: SpanningForest, mesh: float | None = None) -> StructureGraph:
    """One site per forest component; multiplicity = lattice edges
    between the two components."""
    if mesh is None:
        mesh = f.mesh
    comps = f.components
    sites = {}
    for cid, comp in enumerate(comps):
        rep = min((v for v in comp), key=repr)
        sites[cid] = Site(
            size=len(comp),
            diameter=f.component_diameter(cid),
            rep=rep,
            vertices=comp,
        )
    mult: dict = {}
    for e in f.graph.edges:
        a, b = f.component_of(e.u), f.component_of(e.v)
        if a != b:
            key = (a, b) if a <= b else (b, a)
            mult[key] = mult.get(key, 0) + 1
    return StructureGraph(mesh, sites, mult)


def truncate(S: StructureGraph, eps: float) -> StructureGraph:
    """Induced structure subgraph on sites of cluster diameter >= eps."""
    if eps < 0:
        raise PreconditionError("eps must be >= 0")
    keep = {s for s, st in S.sites.items() if st.diameter >= eps}
    return StructureGraph(
        S.mesh,
        {s: S.sites[s] for s in keep},
        {k: m for k, m in S.multiplicities.items() if k[0] in keep and k[1] in keep},
    )


def collapse(S: StructureGraph, edge) -> StructureGraph:
    """Merge the two sites of a structure edge; multiplicities toward
    common neighbors add, all other entries are preserved as-is."""
    a, b = edge
    key = (a, b) if repr(a) <= repr(b) else (b, a)
    if key not in S.multiplicities:
        raise EdgeNotFoundError(f"structure edge {edge!r} not found")
    a, b = key
    sa, sb = S.sites[a], S.sites[b]
    verts = None
    if sa.vertices is not None and sb.vertices is not None:
        verts = sa.vertices | sb.vertices
    merged = Site(
        size=sa.size + sb.size,
        diameter=_merged_diameter(sa, sb, verts, S.mesh),
        rep=min(sa.rep, sb.rep, key=repr),
        vertices=verts,
    )
    sites = {s: st for s, st in S.sites.items() if s not in (a, b)}
    sites[a] = merged
    mult: dict = {}
    for (x, y), m in S.multiplicities.items():
        if (x, y) == (a, b):
            continue
        x = a if x == b else x
        y = a if y == b else y
        if x == y:
            continue
        k = (x, y) if repr(x) <= repr(y) else (y, x)
        mult[k] = mult.get(k, 0) + m
    return StructureGraph(S.mesh, sites, mult)


def _merged_diameter(sa: Site, sb: Site, verts, mesh) -> float:
    if verts is None:
        return max(sa.diameter, sb.diameter)
    pts = [v for v in verts if isinstance(v, tuple) and len(v) == 2]
    best = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = math.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]) * mesh
            if d > best:
                best = d
    return best


def _replay(S: StructureGraph, timed_edges, scheme: str) -> GluingTrajectory:
    """Collapse structure edges in time order, tracking site identity."""
    alias = {s: s for s in S.sites}

    def resolve(s):
        while alias[s] != s:
            alias[s] = alias[alias[s]]
            s = alias[s]
        return s

    current = S
    events = []
    for time, (a, b) in sorted(timed_edges, key=lambda te: (te[0], repr(te[1]))):
        ra, rb = resolve(a), resolve(b)
        if ra == rb:
            raise ValueError("gluing tree edge already merged; not a tree")
        key = (ra, rb) if repr(ra) <= repr(rb) else (rb, ra)
        events.append(
            GlueEvent(
                time=time,
                pair=key,
                multiplicity=current.multiplicities[key],
                sizes=(current.sites[key[0]].size, current.sites[key[1]].size),
            )
        )
        current = collapse(current, key)
        alias[key[1]] = key[0]
    return current, events


def _sorted_wst_edges(S: StructureGraph, rng):
    g = S.as_weighted_graph()
    if not g.is_connected():
        raise DisconnectedGraphError("structure graph is not connected")
    if len(g.vertices) == 1:
        return []
    root = sorted(g.vertices, key=repr)[0]
    tree = wilson_ust(g, root, rng=rng)
    return sorted(tree.tree_edges, key=repr)


def glue_uniform(S: StructureGraph, t: float, rng) -> GluingTrajectory:
    """Weighted spanning tree of S opened at i.i.d. Uniform(t, 0) times."""
    if t >= 0:
        raise PreconditionError("gluing horizon t must be < 0")
    labels = _sorted_wst_edges(S, rng)
    times = sorted(rng.uniform(t, 0.0, size=len(labels)))
    final, events = _replay(S, list(zip(times, labels)), "uniform")
    return GluingTrajectory(S, events, "uniform", final)


def glue_homogeneous(S: StructureGraph, duration: float, rng) -> GluingTrajectory:
    """Exp(1) clocks xi(e) on the spanning tree edges; an edge opens at
    xi(e) when xi(e) <= duration."""
    if duration <= 0:
        raise PreconditionError("duration must be > 0")
    labels = _sorted_wst_edges(S, rng)
    clocks = rng.exponential(1.0, size=len(labels))
    timed = [(float(x), lab) for x, lab in zip(clocks, labels) if x <= duration]
    timed.sort()
    final, events = _replay(S, timed, "homogeneous")
    return GluingTrajectory(S, events, "homogeneous", final)


def glue_resistance_rates(g: WeightedGraph, duration: float, rng, _rate_cache=None):
    """Continuous-time chain: each edge e fires at rate c(e) * R_eff(e)
    in the current contracted graph and is contracted when it fires.

    Returns (events, final graph); events are (time, edge label) pairs.
    duration = math.inf runs to a single vertex.
    """
    if len(g.vertices) > RESISTANCE_CHAIN_MAX_VERTICES:
        raise TooLargeError(
            f"{len(g.vertices)} vertices exceeds chain guard {RESISTANCE_CHAIN_MAX_VERTICES}"
        )
    if not g.is_connected():
        raise DisconnectedGraphError("resistance-rate chain needs a connected graph")
    cache = _rate_cache if _rate_cache is not None else {}
    events = []
    t = 0.0
    current = g
    while len(current.vertices) > 1:
        sig = tuple(
            sorted((repr(e.u), repr(e.v), repr(e.c), repr(e.label)) for e in current.edges)
        )
        rates = cache.get(sig)
        if rates is None:
            exact = len(current.vertices) <= 12
            rates = [
                (
                    e.label,
                    float(e.c)
                    * (
                        float(effective_resistance_exact(current, e))
                        if exact
                        else effective_resistance(current, e)
                    ),
                )
                for e in sorted(current.edges, key=lambda e: repr(e.label))
            ]
            cache[sig] = rates
        total = sum(r for _, r in rates)
        t += rng.exponential(1.0 / total)
        if t > duration:
            break
        u = rng.random() * total
        acc = 0.0
        chosen = rates[-1][0]
        for lab, r in rates:
            acc += r
            if u < acc:
                chosen = lab
                break
        events.append((t, chosen))
        current = contract_edge(current, chosen)
    return events, current
