"""Structure-graph extraction, collapse arithmetic, and gluing chains."""

import math
from collections import Counter

import pytest
from scipy.stats import chisquare

from ustlab.dynamics import forest_at, sample_cut_schedule
from ustlab.errors import EdgeNotFoundError, TooLargeError
from ustlab.graph import WeightedGraph
from ustlab.lattice import build_box_domain
from ustlab.rng import stream
from ustlab.sampling import boundary_ust
from ustlab.structure import (
    Site,
    StructureGraph,
    collapse,
    extract_structure_graph,
    glue_homogeneous,
    glue_resistance_rates,
    glue_uniform,
    truncate,
)


def cut_forest(seed, n=3, t=-1.0):
    d = build_box_domain(n, 1.0, "wired")
    tree = boundary_ust(d, stream(seed, 10))
    sched = sample_cut_schedule(tree, d.mesh, stream(seed + 1, 10))
    return d, forest_at(tree, sched, t)


class TestExtraction:
    def test_sites_match_components(self):
        d, f = cut_forest(50)
        S = extract_structure_graph(f)
        assert len(S.sites) == len(f.components)
        assert sum(s.size for s in S.sites.values()) == len(f.graph.vertices)

    def test_multiplicities_count_host_edges(self):
        d, f = cut_forest(52)
        S = extract_structure_graph(f)
        recount = Counter()
        for e in d.effective_graph.edges:
            a, b = f.component_of(e.u), f.component_of(e.v)
            if a != b:
                recount[(min(a, b), max(a, b))] += 1
        assert sum(m for _, m in S.edge_items()) == sum(recount.values())
        assert sorted(m for _, m in S.edge_items()) == sorted(recount.values())

    def test_weight_is_multiplicity_times_unit(self):
        d, f = cut_forest(54)
        S = extract_structure_graph(f)
        for (a, b), m in S.edge_items():
            assert S.weight(a, b) == pytest.approx(m * S.mesh**1.25)

    def test_truncate_drops_small_sites(self):
        d, f = cut_forest(56, t=-2.0)
        S = extract_structure_graph(f)
        St = truncate(S, 1.5)
        assert set(St.sites) <= set(S.sites)
        assert all(s.diameter >= 1.5 for s in St.sites.values())


class TestCollapse:
    def _fixture(self):
        sites = {x: Site(size=1, diameter=0.0, rep=x) for x in "abcd"}
        mult = {("a", "b"): 2, ("a", "c"): 1, ("b", "c"): 3, ("c", "d"): 5}
        return StructureGraph(1.0, sites, mult)

    def test_common_neighbors_add(self):
        S = self._fixture()
        S2 = collapse(S, ("a", "b"))
        merged = [s for s in S2.sites if s in ("a", "b")]
        assert len(merged) == 1
        assert S2.weight(merged[0], "c") == 1 + 3

    def test_disjoint_edges_preserved(self):
        S = self._fixture()
        S2 = collapse(S, ("a", "b"))
        assert S2.weight("c", "d") == 5

    def test_sizes_add(self):
        S = self._fixture()
        S2 = collapse(S, ("a", "b"))
        merged = [s for s in S2.sites if s in ("a", "b")][0]
        assert S2.sites[merged].size == 2

    def test_missing_edge_rejected(self):
        S = self._fixture()
        with pytest.raises(EdgeNotFoundError):
            collapse(S, ("a", "d"))

    def test_collapse_commutes_with_extraction(self):
        # gluing one structure edge = restoring any host edge between
        # the two clusters and re-extracting (multiplicity bookkeeping)
        d, f = cut_forest(58)
        S = extract_structure_graph(f)
        if len(S.sites) < 2:
            pytest.skip("degenerate cut sample")
        (a, b), m = S.edge_items()[0]
        S2 = collapse(S, (a, b))
        import ustlab.sampling as sampling

        host_edge = next(
            e.label
            for e in d.effective_graph.edges
            if {f.component_of(e.u), f.component_of(e.v)} == {a, b}
        )
        f2 = sampling.SpanningForest(f.graph, f.tree_edges | {host_edge}, d)
        S3 = extract_structure_graph(f2)
        assert sorted(m for _, m in S2.edge_items()) == sorted(
            m for _, m in S3.edge_items()
        )
        assert sorted(s.size for s in S2.sites.values()) == sorted(
            s.size for s in S3.sites.values()
        )


class TestGluing:
    def test_uniform_reaches_single_site(self):
        d, f = cut_forest(60)
        S = extract_structure_graph(f)
        traj = glue_uniform(S, -1.0, stream(61, 11))
        assert len(traj.events) == len(S.sites) - 1
        assert all(-1.0 < ev.time <= 0.0 for ev in traj.events)
        times = [ev.time for ev in traj.events]
        assert times == sorted(times)

    def test_homogeneous_clock_times_increase(self):
        d, f = cut_forest(62)
        S = extract_structure_graph(f)
        traj = glue_homogeneous(S, math.inf, stream(63, 11))
        assert len(traj.events) == len(S.sites) - 1
        times = [ev.time for ev in traj.events]
        assert times == sorted(times)
        assert all(t >= 0 for t in times)

    def test_finite_duration_truncates(self):
        d, f = cut_forest(64)
        S = extract_structure_graph(f)
        traj = glue_homogeneous(S, 1e-9, stream(65, 11))
        assert len(traj.events) <= len(S.sites) - 1

    def test_event_multiplicities_match_structure(self):
        d, f = cut_forest(66)
        S = extract_structure_graph(f)
        traj = glue_uniform(S, -1.0, stream(67, 11))
        assert all(ev.multiplicity >= 1 for ev in traj.events)


class TestResistanceChain:
    def test_runs_to_single_vertex(self, k3):
        events, final = glue_resistance_rates(k3, math.inf, stream(70, 12))
        assert len(events) == 2
        assert len(final.vertices) == 1

    def test_law_matches_ust_on_triangle(self, k3):
        rng = stream(71, 12)
        cache = {}
        counts = Counter(
            frozenset(lab for _, lab in glue_resistance_rates(k3, math.inf, rng, _rate_cache=cache)[0])
            for _ in range(20000)
        )
        assert len(counts) == 3
        assert chisquare(list(counts.values())).pvalue > 0.001

    def test_guard_rejects_large_graphs(self):
        n = 500
        path = WeightedGraph(range(n), [(i, i + 1, 1, i) for i in range(n - 1)])
        with pytest.raises(TooLargeError):
            glue_resistance_rates(path, math.inf, stream(72, 12))
