"""Poissonian cutting of a spanning tree and interface statistics.

Each tree edge carries an independent negative cut time tau(e), with
-tau(e) exponential of mean mesh^(-5/4); the forest at time t <= 0 keeps
the edges with tau(e) <= t.  Interface cycles live in the dual tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ComponentError, EdgeNotFoundError, PreconditionError
from .sampling import LENGTH_EXPONENT, SpanningForest, tree_branch

__all__ = [
    "CutSchedule",
    "sample_cut_schedule",
    "forest_at",
    "first_cut_on_branch",
    "interface_cycle",
    "interface_length",
    "cut_out_length",
    "cut_rate",
]

NEG_INF = float("-inf")


def cut_rate(mesh: float) -> float:
    """Per-edge cut intensity per unit of |t|."""
    return mesh**LENGTH_EXPONENT


@dataclass
class CutSchedule:
    """Negative cut times, one per tree edge."""

    times: dict  # edge label -> tau < 0
    rate: float

    def __post_init__(self):
        if any(t >= 0 for t in self.times.values()):
            raise ValueError("cut times must be strictly negative")

    def cut_edges(self, t: float):
        """Labels cut on (t, 0], i.e. removed by time t."""
        return {lab for lab, tau in self.times.items() if tau > t}


def sample_cut_schedule(tree: SpanningForest, mesh: float, rng) -> CutSchedule:
    """Independent exponential (-tau) per tree edge, mean mesh^(-5/4)."""
    if not tree.tree_edges:
        raise PreconditionError("cut schedule needs a nonempty tree")
    lam = cut_rate(mesh)
    labels = sorted(tree.tree_edges, key=repr)
    taus = -rng.exponential(scale=1.0 / lam, size=len(labels))
    return CutSchedule({lab: float(tau) for lab, tau in zip(labels, taus)}, lam)


def forest_at(tree: SpanningForest, sched: CutSchedule, t: float) -> SpanningForest:
    """Subforest keeping the edges with tau(e) <= t (t = -inf allowed)."""
    if t > 0:
        raise PreconditionError("cutting time must be <= 0")
    if t == NEG_INF:
        kept = frozenset()
    else:
        kept = frozenset(lab for lab in tree.tree_edges if sched.times[lab] <= t)
    return SpanningForest(tree.graph, kept, host=tree.host)


def first_cut_on_branch(sched: CutSchedule, branch, t: float):
    """Edge of the branch with maximal tau in (t, 0], or None.

    branch may be a LerwPath (its consecutive-vertex edges are looked
    up in the schedule domain) or an iterable of edge labels.
    """
    labels = _branch_labels(sched, branch)
    best = None
    best_tau = t
    for lab in labels:
        tau = sched.times[lab]
        if tau > best_tau:
            best, best_tau = lab, tau
    return best


def _branch_labels(sched, branch):
    if hasattr(branch, "vertices"):
        verts = branch.vertices
        labels = []
        for a, b in zip(verts, verts[1:]):
            lab = (a, b) if a <= b else (b, a)
            if lab not in sched.times:
                raise EdgeNotFoundError(f"branch edge {lab!r} not in schedule")
            labels.append(lab)
        return labels
    labels = list(branch)
    for lab in labels:
        if lab not in sched.times:
            raise EdgeNotFoundError(f"branch edge {lab!r} not in schedule")
    return labels


def interface_cycle(tree: SpanningForest, dual: SpanningForest, e) -> dict:
    """The unique cycle closed by e* in the dual tree.

    Returns the dual edge labels of the cycle (e* plus the dual-tree
    branch joining e*'s endpoints), its edge count, and its
    renormalized length count * mesh^(5/4).
    """
    edge = tree.graph.find_edge(e)
    if edge.label not in tree.tree_edges:
        raise EdgeNotFoundError(f"{e!r} is not a tree edge")
    host = tree.host
    dual_label = host.dual_bijection[edge.label]
    dual_edge = dual.graph.find_edge(dual_label)
    if dual_edge.u == dual_edge.v:
        cycle = [dual_label]
    else:
        branch = tree_branch(dual, dual_edge.u, dual_edge.v)
        labels = [dual_label]
        for a, b in zip(branch.vertices, branch.vertices[1:]):
            for cand in dual.graph.incident(a):
                if cand.other(a) == b and cand.label in dual.tree_edges:
                    labels.append(cand.label)
                    break
        cycle = labels
    mesh = tree.mesh
    return {
        "edges": cycle,
        "edge_count": len(cycle),
        "renormalized_length": len(cycle) * mesh**LENGTH_EXPONENT,
    }


def interface_length(f: SpanningForest, c0: int, c1: int, mesh: float | None = None) -> float:
    """mesh^(5/4) times the number of host-lattice edges between two
    components; 0 when they are not adjacent."""
    ncomp = len(f.components)
    if not (0 <= c0 < ncomp and 0 <= c1 < ncomp):
        raise ComponentError(f"component ids {c0}, {c1} out of range")
    if c0 == c1:
        raise ComponentError("interface needs two distinct components")
    if mesh is None:
        mesh = f.mesh
    count = 0
    for e in f.graph.edges:
        a, b = f.component_of(e.u), f.component_of(e.v)
        if (a, b) in ((c0, c1), (c1, c0)):
            count += 1
    return count * mesh**LENGTH_EXPONENT


def cut_out_length(
    tree: SpanningForest,
    dual: SpanningForest,
    sched: CutSchedule,
    e,
    t: float,
    eps: float,
    eta: float,
    mesh: float | None = None,
) -> float:
    """Renormalized length of the interface cycle lost to small cuts.

    A dual edge of the cycle (inside B(0, 1/eta), at distance > eta from
    e) is counted when one endpoint of its primal partner lies in a
    subtree that some other cut edge detaches from e at diameter < eps.
    Single-vertex detached subtrees contribute nothing.
    """
    if mesh is None:
        mesh = tree.mesh
    edge = tree.graph.find_edge(e)
    if sched.times[edge.label] <= t:
        raise PreconditionError("e must be a cut edge at time t")
    cycle = interface_cycle(tree, dual, edge.label)
    host = tree.host
    cuts = sched.cut_edges(t) - {edge.label}
    if not cuts:
        return 0.0

    # orient the tree away from e's endpoints, marking detached subtrees
    adj = tree.adjacency()
    parent = {edge.u: None, edge.v: None}
    order = [edge.u, edge.v]
    head = 0
    while head < len(order):
        v = order[head]
        head += 1
        for w, lab in adj[v]:
            if w not in parent and lab != edge.label:
                parent[w] = (v, lab)
                order.append(w)

    # vertices detached from e by each single cut f: the subtree below f
    children: dict = {}
    for v in order:
        if parent[v] is not None:
            children.setdefault(parent[v][0], []).append(v)
    detached_small = set()
    for f_lab in cuts:
        fe = tree.graph.find_edge(f_lab)
        pv, pu = parent.get(fe.v), parent.get(fe.u)
        if pv is not None and pv[1] == f_lab:
            below = fe.v
        elif pu is not None and pu[1] == f_lab:
            below = fe.u
        else:  # unreachable for a tree edge distinct from e
            continue
        # collect the subtree hanging below the cut
        sub = [below]
        head = 0
        while head < len(sub):
            v = sub[head]
            head += 1
            sub.extend(children.get(v, []))
        if len(sub) < 2:
            continue  # single vertices carry no dual-cycle arc
        pts = [host.position(v) for v in sub if isinstance(v, tuple)]
        diam = 0.0
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                d = math.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1])
                if d > diam:
                    diam = d
        if diam < eps:
            detached_small.update(sub)

    ex, ey = host.position(edge.u)
    fx, fy = host.position(edge.v)
    emid = ((ex + fx) / 2.0, (ey + fy) / 2.0)
    count = 0
    for dlab in cycle["edges"]:
        if dlab == host.dual_bijection[edge.label]:
            continue
        primal_lab = host.dual.dual_bijection[dlab]
        pe = tree.graph.find_edge(primal_lab)
        (ax, ay), (bx, by) = host.position(pe.u), host.position(pe.v)
        mid = ((ax + bx) / 2.0, (ay + by) / 2.0)
        if math.hypot(*mid) > 1.0 / eta:
            continue
        if math.hypot(mid[0] - emid[0], mid[1] - emid[1]) < eta:
            continue
        if pe.u in detached_small or pe.v in detached_small:
            count += 1
    return count * mesh**LENGTH_EXPONENT
