"""Monte Carlo estimators and exact hypothesis tests.

Covers the walk/loop-erasure escape probability, four-arm annulus
events, the annulus crossing count K, the loop-erased-walk length
exponent, the exact time-reversal identity for cutting vs gluing, and
coupling monotonicity of edge marginals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import (
    DegenerateFitError,
    GeometryError,
    InsufficientInputError,
    PreconditionError,
    TooLargeError,
)
from .graph import (
    WeightedGraph,
    edge_ust_probability_exact,
    enumerate_spanning_trees,
    spanning_tree_count,
)
from .lattice import LatticeDomain, annulus_rings, build_box_domain
from .rng import spawn_kernel_seeds, stream
from .sampling import (
    LENGTH_EXPONENT,
    SpanningForest,
    _lattice_csr,
    boundary_ust,
    dual_tree,
)
from .structure import StructureGraph, extract_structure_graph, glue_uniform, truncate

__all__ = [
    "EstimateReport",
    "estimate_es",
    "lerw_length_scaling",
    "detect_four_arm",
    "four_arm_rate",
    "estimate_k_statistic",
    "time_reversal_tv_test",
    "weight_scaling_signature",
    "edge_marginal_monotonicity_check",
    "monotonicity_corpus",
    "fit_loglog_slope",
]

TV_EXACT_MAX_VERTICES = 6


@dataclass
class EstimateReport:
    """A Monte Carlo estimate with its sampling error."""

    estimate: float
    stderr: float
    samples: int
    seed: int
    metadata: dict = field(default_factory=dict)

    @property
    def ci95(self) -> tuple:
        return (self.estimate - 1.96 * self.stderr, self.estimate + 1.96 * self.stderr)

    def as_dict(self) -> dict:
        lo, hi = self.ci95
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
            "ci95_lo": lo,
            "ci95_hi": hi,
            **self.metadata,
        }


def _bernoulli_report(hits: int, samples: int, seed: int, meta: dict) -> EstimateReport:
    p = hits / samples
    stderr = math.sqrt(max(p * (1 - p), 0.0) / samples)
    return EstimateReport(p, stderr, samples, seed, meta)


# -- escape probability Es(L, N) -------------------------------------------


def estimate_es(L: int, N: int, samples: int, seed: int, replicate_offset: int = 0) -> EstimateReport:
    """Probability that a fresh walk from 0 avoids the tail (beyond
    radius L) of an independent loop-erased walk to radius N."""
    if not (1 <= L <= N / 2):
        raise PreconditionError(f"need 1 <= L <= N/2, got L={L}, N={N}")
    seeds = spawn_kernel_seeds(seed, samples, 0xE5, L, N, replicate_offset)
    hits = int(_kernels.escape_batch(L, N, seeds).sum())
    return _bernoulli_report(hits, samples, seed, {"L": L, "N": N})


# -- LERW length exponent ---------------------------------------------------


def fit_loglog_slope(xs, ys, y_stderrs=None):
    """OLS slope of log y against log x with a delta-method stderr."""
    if len(xs) < 2 or len(set(xs)) != len(xs):
        raise DegenerateFitError("need distinct x values")
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    vx = lx - lx.mean()
    denom = float((vx**2).sum())
    if denom == 0.0:
        raise DegenerateFitError("x values do not vary")
    slope = float((vx * ly).sum() / denom)
    intercept = float(ly.mean() - slope * lx.mean())
    if y_stderrs is not None:
        rel = np.asarray(y_stderrs, dtype=float) / np.asarray(ys, dtype=float)
        var = float(((vx / denom) ** 2 * rel**2).sum())
        stderr = math.sqrt(var)
    else:
        resid = ly - (slope * lx + intercept)
        dof = max(len(xs) - 2, 1)
        stderr = math.sqrt(float((resid**2).sum()) / dof / denom)
    return {"slope": slope, "intercept": intercept, "stderr": stderr}


def lerw_length_scaling(sizes, samples: int, seed: int) -> dict:
    """Fit of log E[loop-erased walk edge count 0 -> dB(N)] vs log N."""
    if len(sizes) < 3:
        raise InsufficientInputError("need at least 3 sizes")
    if len(set(sizes)) != len(sizes):
        raise DegenerateFitError("sizes must be distinct")
    means, stderrs, rows = [], [], []
    for N in sizes:
        seeds = spawn_kernel_seeds(seed, samples, 0x1E, int(N))
        lengths = _kernels.lerw_length_batch(int(N), seeds)
        m = float(lengths.mean())
        se = float(lengths.std(ddof=1) / math.sqrt(samples))
        means.append(m)
        stderrs.append(se)
        rows.append(
            {
                "N": int(N),
                "mean_edges": m,
                "stderr": se,
                "renormalized": m / float(N) ** LENGTH_EXPONENT,
            }
        )
    fit = fit_loglog_slope(sizes, means, stderrs)
    return {"fit": fit, "per_size": rows, "samples": samples, "seed": seed}


# -- four-arm event ----------------------------------------------------------


def _crossing_reps_python(forest: SpanningForest, d: LatticeDomain, L, N, center):
    """Closest-to-center representative of each annulus-crossing
    component of forest edges restricted to the closed annulus."""
    cx, cy = center
    delta = d.mesh

    def norm(v):
        try:
            x, y = d.position(v)
        except (TypeError, ValueError):  # wired/outer super-vertices
            return math.inf
        return math.hypot(x - cx, y - cy)

    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for lab in forest.tree_edges:
        e = forest.graph.find_edge(lab)
        nu, nv = norm(e.u), norm(e.v)
        if L <= nu < N + delta and L <= nv < N + delta:
            parent.setdefault(e.u, e.u)
            parent.setdefault(e.v, e.v)
            ra, rb = find(e.u), find(e.v)
            if ra != rb:
                parent[rb] = ra
    info: dict = {}
    for v in parent:
        r = find(v)
        nv = norm(v)
        rec = info.setdefault(r, {"in": False, "out": False, "closest": v})
        if L <= nv < L + delta:
            rec["in"] = True
        if N <= nv < N + delta:
            rec["out"] = True
        if nv < norm(rec["closest"]):
            rec["closest"] = v
    return [rec["closest"] for rec in info.values() if rec["in"] and rec["out"]]


def _joined_inside_python(forest: SpanningForest, d, u, v, radius, center):
    from .sampling import tree_branch

    cx, cy = center
    branch = tree_branch(forest, u, v)

    def norm(w):
        try:
            x, y = d.position(w)
        except (TypeError, ValueError):
            return math.inf
        return math.hypot(x - cx, y - cy)

    return all(norm(w) <= radius for w in branch.vertices)


def detect_four_arm(tree: SpanningForest, dual: SpanningForest, L, N, center=(0.0, 0.0)) -> bool:
    """Four alternating tree/dual-tree arms across the annulus B(L)..B(N).

    Detected via either scenario: two annulus-crossing components of the
    tree joined by tree edges inside B(center, L + mesh), or the same
    for the dual tree (shifted by the dual's half-cell offset).
    """
    if not tree.is_spanning_tree() or not dual.is_spanning_tree():
        raise PreconditionError("detection needs a spanning tree and its dual tree")
    d = tree.host
    annulus_rings(d, L, N)  # geometry validation
    for forest, dom in ((tree, d), (dual, dual.host)):
        reps = _crossing_reps_python(forest, dom, L, N, center)
        if len(reps) >= 2:
            radius = L + dom.mesh * (1 + 1e-9)
            for u, v in itertools.combinations(reps, 2):
                if _joined_inside_python(forest, dom, u, v, radius, center):
                    return True
    return False


class _FourArmSampler:
    """Per-domain compiled pipeline for four-arm sampling on wired boxes."""

    def __init__(self, N: int, box_factor: float = 1.5):
        n = int(math.ceil(N * box_factor)) + 1
        self.domain = build_box_domain(n, 1.0, "wired")
        self.cache = _lattice_csr(self.domain)
        cache = self.cache
        self.root = cache["vidx"]["wired"]
        self.order = np.arange(len(cache["verts"]), dtype=np.int64)
        # dual arrays: faces of the wired box (free dual)
        d = self.domain
        dual = d.dual
        dverts = sorted((v for v in dual.vertices), key=repr)
        dvidx = {v: i for i, v in enumerate(dverts)}
        g = cache["graph"]
        deu = np.empty(len(g.edges), dtype=np.int64)
        dev = np.empty(len(g.edges), dtype=np.int64)
        for k, e in enumerate(g.edges):
            dlab = d.dual_bijection[e.label]
            de = dual.effective_graph.find_edge(dlab)
            deu[k] = dvidx[de.u]
            dev[k] = dvidx[de.v]
        self.deu, self.dev = deu, dev
        self.dnorms = np.array(
            [math.hypot(*dual.position(v)) if v != "outer" else np.inf for v in dverts]
        )

    def sample(self, L, N, seed) -> bool:
        cache = self.cache
        nxt = _kernels.wilson_csr(cache["indptr"], cache["indices"], self.order, self.root, seed)
        eu, ev, norms = cache["eu"], cache["ev"], cache["norms"]
        emask = (nxt[eu] == ev) | (nxt[ev] == eu)
        radius = L + 1.0 + 1e-9
        reps = _kernels.crossing_components(eu, ev, emask, norms, float(L), float(N), float(L), float(N), 1.0)
        if reps.shape[0] >= 2:
            depth = _kernels.tree_depths(nxt, self.root)
            for i in range(reps.shape[0]):
                for j in range(i + 1, reps.shape[0]):
                    if _kernels.joined_within(nxt, depth, norms, reps[i], reps[j], radius):
                        return True
        dmask = ~emask
        reps = _kernels.crossing_components(
            self.deu, self.dev, dmask, self.dnorms, float(L), float(N), float(L), float(N), 1.0
        )
        if reps.shape[0] >= 2:
            indptr, indices = _kernels.build_adjacency(self.dnorms.shape[0], self.deu, self.dev, dmask)
            parent, depth = _kernels.bfs_tree_parents(indptr, indices, 0)
            for i in range(reps.shape[0]):
                for j in range(i + 1, reps.shape[0]):
                    if _kernels.joined_within(parent, depth, self.dnorms, reps[i], reps[j], radius):
                        return True
        return False


def four_arm_rate(L: int, N: int, samples: int, seed: int, box_factor: float = 1.5) -> EstimateReport:
    """Monte Carlo P(four-arm event between radii L and N) on a wired
    box approximating the whole-plane tree."""
    if not (0 < L < N):
        raise PreconditionError("need 0 < L < N")
    sampler = _FourArmSampler(N, box_factor)
    seeds = spawn_kernel_seeds(seed, samples, 0x4A, L, N)
    hits = sum(sampler.sample(L, N, np.uint64(s)) for s in seeds)
    return _bernoulli_report(hits, samples, seed, {"L": L, "N": N, "ratio": N / L})


# -- K statistic --------------------------------------------------------------


def estimate_k_statistic(L: int, domain_scale: int, samples: int, seed: int) -> EstimateReport:
    """Mean number of annulus-crossing tree components between B(L) and B(3L)."""
    if domain_scale < 3 * L + 1:
        raise GeometryError(f"domain scale {domain_scale} cannot contain B({3 * L})")
    domain = build_box_domain(domain_scale, 1.0, "wired")
    cache = _lattice_csr(domain)
    root = cache["vidx"]["wired"]
    order = np.arange(len(cache["verts"]), dtype=np.int64)
    eu, ev, norms = cache["eu"], cache["ev"], cache["norms"]
    seeds = spawn_kernel_seeds(seed, samples, 0x5C, L, domain_scale)
    ks = np.empty(samples, dtype=np.int64)
    for i, s in enumerate(seeds):
        nxt = _kernels.wilson_csr(cache["indptr"], cache["indices"], order, root, np.uint64(s))
        emask = (nxt[eu] == ev) | (nxt[ev] == eu)
        ks[i] = _kernels.count_crossing_components(
            eu, ev, emask, norms, float(L), float(3 * L), 1.0
        )
    mean = float(ks.mean())
    stderr = float(ks.std(ddof=1) / math.sqrt(samples))
    return EstimateReport(mean, stderr, samples, seed, {"L": L, "domain_scale": domain_scale})


# -- time reversal of cutting vs gluing ---------------------------------------


def _forest_state(graph: WeightedGraph, kept_labels):
    """Partition of vertices + structure multiplicities + cut-edge map."""
    parent = {v: v for v in graph.vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for lab in kept_labels:
        e = graph.find_edge(lab)
        a, b = find(e.u), find(e.v)
        if a != b:
            parent[b] = a
    comp = {}
    for v in graph.vertices:
        comp.setdefault(find(v), []).append(v)
    roots = sorted(comp, key=repr)
    cid = {r: i for i, r in enumerate(roots)}
    of = {v: cid[find(v)] for v in graph.vertices}
    sizes = tuple(len(comp[r]) for r in roots)
    mult: dict = {}
    for e in graph.edges:
        a, b = of[e.u], of[e.v]
        if a != b:
            key = (a, b) if a < b else (b, a)
            mult[key] = mult.get(key, 0) + 1
    return of, sizes, mult


def _structure_tree_law(mult: dict):
    """Exact weighted spanning tree law on a small structure graph."""
    sites = sorted({s for k in mult for s in k})
    g = WeightedGraph(sites, [(a, b, m, (a, b)) for (a, b), m in sorted(mult.items())])
    trees = enumerate_spanning_trees(g)
    total = sum(Fraction(w) for _, w in trees)
    law = {}
    for combo, w in trees:
        key = frozenset(e.label for e in combo)
        law[key] = Fraction(w) / total
    return law


def _exact_reversal_check(domain: LatticeDomain, p: Fraction):
    """Enumerate (tree, cut set) outcomes and compare the conditional
    law of the cut trace on the structure graph with the weighted
    spanning tree law.  Returns (ok, total variation as Fraction)."""
    g = domain.effective_graph
    if len(g.vertices) > TV_EXACT_MAX_VERTICES:
        raise TooLargeError("exact reversal enumeration limited to 6 vertices")
    trees = enumerate_spanning_trees(g)
    ntrees = len(trees)
    joint: dict = {}
    for combo, _w in trees:
        labels = [e.label for e in combo]
        for r in range(len(labels) + 1):
            for cut in itertools.combinations(labels, r):
                kept = [lab for lab in labels if lab not in cut]
                of, sizes, mult = _forest_state(g, kept)
                part = tuple(sorted(tuple(sorted(map(repr, (v for v in g.vertices if of[v] == c)))) for c in range(len(sizes))))
                trace = frozenset()
                if cut:
                    tr = set()
                    for lab in cut:
                        e = g.find_edge(lab)
                        a, b = of[e.u], of[e.v]
                        tr.add((a, b) if a < b else (b, a))
                    trace = frozenset(tr)
                prob = Fraction(1, ntrees) * p ** len(cut) * (1 - p) ** (len(labels) - len(cut))
                key = (part, tuple(sorted(mult.items())))
                joint.setdefault(key, {}).setdefault(trace, Fraction(0))
                joint[key][trace] += prob
    ok = True
    tv = Fraction(0)
    for (part, mult_items), traces in joint.items():
        mult = dict(mult_items)
        total = sum(traces.values())
        if not mult:  # single component: trace is empty
            continue
        law = _structure_tree_law(mult)
        support = set(law) | set(traces)
        for tr in support:
            q_obs = traces.get(tr, Fraction(0)) / total
            q_wst = law.get(tr, Fraction(0))
            tv += total * abs(q_obs - q_wst)
            if q_obs != q_wst:
                ok = False
    return ok, tv / 2


class _SmallDomainReversal:
    """Precomputed machinery for sampled backward-cut vs forward-glue
    trajectory summaries on a small domain."""

    def __init__(self, domain: LatticeDomain):
        g = domain.effective_graph
        trees = enumerate_spanning_trees(g)
        self.graph = g
        self.tree_labels = [tuple(e.label for e in combo) for combo, _ in trees]
        self.states: dict = {}  # (tree idx, cut mask) -> state record

    def _state(self, ti: int, mask: int):
        rec = self.states.get((ti, mask))
        if rec is not None:
            return rec
        labels = self.tree_labels[ti]
        cut = [lab for k, lab in enumerate(labels) if mask >> k & 1]
        kept = [lab for k, lab in enumerate(labels) if not mask >> k & 1]
        of, sizes, mult = _forest_state(self.graph, kept)
        cut_pairs = []
        for lab in cut:
            e = self.graph.find_edge(lab)
            a, b = of[e.u], of[e.v]
            cut_pairs.append((a, b) if a < b else (b, a))
        wst_choices = None
        if mult:
            law = _structure_tree_law(mult)
            items = sorted(law.items(), key=lambda kv: repr(sorted(kv[0])))
            probs = np.cumsum([float(p) for _, p in items])
            wst_choices = ([tuple(sorted(k)) for k, _ in items], probs)
        rec = {"sizes": sizes, "mult": mult, "cut_pairs": cut_pairs, "wst": wst_choices}
        self.states[(ti, mask)] = rec
        return rec

    @staticmethod
    def _summary(sizes, mult, ordered_pairs):
        """Merge-replay summary: per merge, (smaller size, larger size,
        multiplicity of the merged structure edge)."""
        sizes = list(sizes)
        alias = list(range(len(sizes)))

        def find(x):
            while alias[x] != x:
                alias[x] = alias[alias[x]]
                x = alias[x]
            return x

        mult = dict(mult)
        out = []
        for a, b in ordered_pairs:
            ra, rb = find(a), find(b)
            key = (ra, rb) if ra < rb else (rb, ra)
            m = mult[key]
            sa, sb = sizes[ra], sizes[rb]
            out.append((min(sa, sb), max(sa, sb)))
            # collapse rb into ra
            new = {}
            for (x, y), mm in mult.items():
                if (x, y) == key:
                    continue
                x = ra if x == rb else x
                y = ra if y == rb else y
                if x == y:
                    continue
                k2 = (x, y) if x < y else (y, x)
                new[k2] = new.get(k2, 0) + mm
            mult = new
            alias[rb] = ra
            sizes[ra] = sa + sb
        return tuple(out)

    def sample_backward(self, rng):
        ti = int(rng.integers(len(self.tree_labels)))
        k = len(self.tree_labels[ti])
        p = self.p
        mask = 0
        for b in range(k):
            if rng.random() < p:
                mask |= 1 << b
        rec = self._state(ti, mask)
        pairs = list(rec["cut_pairs"])
        rng.shuffle(pairs)
        return self._summary(rec["sizes"], rec["mult"], pairs)

    def sample_forward(self, rng):
        ti = int(rng.integers(len(self.tree_labels)))
        k = len(self.tree_labels[ti])
        p = self.p
        mask = 0
        for b in range(k):
            if rng.random() < p:
                mask |= 1 << b
        rec = self._state(ti, mask)
        if rec["wst"] is None:
            return ()
        keys, cum = rec["wst"]
        u = rng.random()
        idx = int(np.searchsorted(cum, u))
        pairs = list(keys[min(idx, len(keys) - 1)])
        rng.shuffle(pairs)  # i.i.d. uniform times => uniform merge order
        return self._summary(rec["sizes"], rec["mult"], pairs)


def time_reversal_tv_test(domain: LatticeDomain, t: float, samples: int, seed: int):
    """Exact and/or sampled comparison of backward cutting vs forward gluing.

    Exact branch (<= 6 vertices): rational enumeration; returns tv as a
    float of the exact total variation (0 when the laws agree).
    Sampled branch (samples > 0): empirical TV between trajectory
    summaries of the two protocols.
    """
    if t >= 0:
        raise PreconditionError("t must be < 0")
    exact_ok = None
    tv = None
    if len(domain.effective_graph.vertices) <= TV_EXACT_MAX_VERTICES:
        ok, tv_exact = _exact_reversal_check(domain, Fraction(1, 2))
        exact_ok = ok
        tv = float(tv_exact)
    if samples > 0:
        machine = _SmallDomainReversal(domain)
        machine.p = 1.0 - math.exp(t * domain.mesh**LENGTH_EXPONENT)
        rng_b = stream(seed, 0xB)
        rng_f = stream(seed, 0xF)
        counts_b: dict = {}
        counts_f: dict = {}
        for _ in range(samples):
            sb = machine.sample_backward(rng_b)
            counts_b[sb] = counts_b.get(sb, 0) + 1
            sf = machine.sample_forward(rng_f)
            counts_f[sf] = counts_f.get(sf, 0) + 1
        support = set(counts_b) | set(counts_f)
        tv = 0.5 * sum(
            abs(counts_b.get(s, 0) - counts_f.get(s, 0)) / samples for s in support
        )
    if tv is None:
        raise PreconditionError("domain too large for exact branch and samples == 0")
    return tv, exact_ok


# -- weight distribution across scales ----------------------------------------


def weight_scaling_signature(mesh_list, t: float, samples: int, seed: int, eps: float = 0.25) -> dict:
    """Structure-edge weight distributions at matched physical scale
    across meshes, with two-sample KS statistics between consecutive
    meshes (stabilization signature)."""
    from scipy.stats import ks_2samp

    if len(mesh_list) < 2:
        raise InsufficientInputError("need at least two mesh sizes")
    if samples < 2:
        raise InsufficientInputError("need at least two samples")
    weights_by_mesh = {}
    for mesh in mesh_list:
        n = max(int(round(1.0 / mesh)), 2)
        domain = build_box_domain(n, mesh, "wired")
        rng = stream(seed, 0x5F, n)
        weights = []
        for _ in range(samples):
            f = boundary_ust(domain, rng)
            from .dynamics import forest_at, sample_cut_schedule

            sched = sample_cut_schedule(f, mesh, rng)
            ft = forest_at(f, sched, t)
            S = truncate(extract_structure_graph(ft), eps)
            weights.extend(m * S.weight_unit for _, m in S.edge_items())
        weights_by_mesh[mesh] = np.asarray(weights)
    ks_rows = []
    meshes = list(mesh_list)
    for a, b in zip(meshes, meshes[1:]):
        wa, wb = weights_by_mesh[a], weights_by_mesh[b]
        if len(wa) == 0 or len(wb) == 0:
            raise InsufficientInputError("no structure edges survived truncation")
        res = ks_2samp(wa, wb)
        ks_rows.append({"mesh_a": a, "mesh_b": b, "ks": float(res.statistic), "p": float(res.pvalue)})
    return {
        "ks": ks_rows,
        "counts": {m: int(len(w)) for m, w in weights_by_mesh.items()},
        "t": t,
        "eps": eps,
        "samples": samples,
        "seed": seed,
    }


# -- coupling monotonicity -----------------------------------------------------


def monotonicity_corpus(max_vertices: int = 6):
    """All connected graphs up to max_vertices (graph atlas), paired
    with every connected single-edge-deleted subgraph."""
    import networkx as nx

    pairs = []
    for G in nx.graph_atlas_g()[1:]:
        n = G.number_of_nodes()
        if n < 2 or n > max_vertices or not nx.is_connected(G):
            continue
        g = WeightedGraph(
            list(G.nodes), [(u, v, 1, (min(u, v), max(u, v))) for u, v in G.edges]
        )
        for f in G.edges:
            H = G.copy()
            H.remove_edge(*f)
            if not nx.is_connected(H):
                continue
            h = WeightedGraph(
                list(H.nodes), [(u, v, 1, (min(u, v), max(u, v))) for u, v in H.edges]
            )
            pairs.append((g, h, (min(f), max(f))))
    return pairs


def edge_marginal_monotonicity_check(corpus=None) -> bool:
    """Exact check: deleting an edge never lowers surviving edges'
    UST marginals (P(e in UST(G)) <= P(e in UST(G - f)))."""
    if corpus is None:
        corpus = monotonicity_corpus()
    for g, h, deleted in corpus:
        for e in h.edges:
            pg = edge_ust_probability_exact(g, e.label)
            ph = edge_ust_probability_exact(h, e.label)
            if pg > ph:
                return False
    return True


def conditional_monotonicity_check(g: WeightedGraph, cond_set, i1, i2) -> bool:
    """Exact conditional version: with T's intersection with cond_set
    pinned to i1 (resp. i2 ⊇ i1), every edge outside cond_set has a
    lower marginal under the larger pin."""
    i1, i2 = frozenset(i1), frozenset(i2)
    cond = frozenset(cond_set)
    if not i1 <= i2 <= cond:
        raise PreconditionError("need i1 ⊆ i2 ⊆ cond_set")
    trees = enumerate_spanning_trees(g)

    def marginals(pin):
        admissible = [
            (combo, w)
            for combo, w in trees
            if frozenset(e.label for e in combo) & cond == pin
        ]
        total = sum(Fraction(w) for _, w in admissible)
        if total == 0:
            raise PreconditionError("pin cannot be completed to a spanning tree")
        out = {}
        for e in g.edges:
            if e.label in cond:
                continue
            mass = sum(
                Fraction(w) for combo, w in admissible if any(x.label == e.label for x in combo)
            )
            out[e.label] = mass / total
        return out

    m1, m2 = marginals(i1), marginals(i2)
    return all(m2[lab] <= m1[lab] for lab in m1)
