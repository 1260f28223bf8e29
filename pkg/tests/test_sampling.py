"""Wilson sampling, loop erasure, boundary trees, and planar duality."""

import math
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from ustlab.errors import ComponentError, PreconditionError, UnreachableTargetError
from ustlab.graph import WeightedGraph, enumerate_spanning_trees
from ustlab.lattice import WIRED, build_box_domain, build_rect_domain
from ustlab.rng import stream
from ustlab.sampling import (
    LENGTH_EXPONENT,
    SpanningForest,
    boundary_ust,
    dual_tree,
    loop_erased_walk,
    tree_branch,
    wilson_ust,
)


class TestLoopErasedWalk:
    def test_path_is_simple(self, k3):
        rng = stream(1, 1)
        for _ in range(50):
            p = loop_erased_walk(k3, 0, {2}, rng)
            assert len(set(p.vertices)) == len(p.vertices)
            assert p.vertices[0] == 0 and p.vertices[-1] == 2

    def test_walk_length_at_least_path(self, k3):
        rng = stream(2, 1)
        p = loop_erased_walk(k3, 0, {2}, rng)
        assert p.steps_of_walk >= p.edge_count

    def test_unreachable_target(self):
        g = WeightedGraph([0, 1, 2, 3], [(0, 1, 1, "a"), (2, 3, 1, "b")])
        with pytest.raises(UnreachableTargetError):
            loop_erased_walk(g, 0, {3}, stream(3, 1))

    def test_renormalized_length(self, k3):
        p = loop_erased_walk(k3, 0, {2}, stream(4, 1))
        assert p.renormalized_length == pytest.approx(
            p.edge_count * p.mesh**LENGTH_EXPONENT
        )


class TestWilson:
    def test_result_is_spanning_tree(self, k3_weighted):
        rng = stream(5, 2)
        for _ in range(20):
            t = wilson_ust(k3_weighted, root=0, rng=rng)
            assert t.is_spanning_tree()
            assert len(t.tree_edges) == 2

    def test_weighted_law_on_triangle(self, k3_weighted):
        # trees {a,b}, {a,c}, {b,c} have weights 2, 2, 1
        rng = stream(6, 2)
        counts = Counter(
            frozenset(wilson_ust(k3_weighted, root=0, rng=rng).tree_edges)
            for _ in range(30000)
        )
        expect = {
            frozenset({"a", "b"}): 2 / 5,
            frozenset({"a", "c"}): 2 / 5,
            frozenset({"b", "c"}): 1 / 5,
        }
        for key, p in expect.items():
            n = 30000
            se = math.sqrt(p * (1 - p) / n)
            assert abs(counts[key] / n - p) < 4 * se

    def test_uniform_law_on_cycle(self, c4):
        rng = stream(7, 2)
        counts = Counter(
            frozenset(wilson_ust(c4, root=0, rng=rng).tree_edges) for _ in range(20000)
        )
        assert len(counts) == 4
        assert chisquare(list(counts.values())).pvalue > 0.001

    def test_parallel_edges_resolved_by_conductance(self):
        g = WeightedGraph([0, 1], [(0, 1, 3, "heavy"), (0, 1, 1, "light")])
        rng = stream(8, 2)
        counts = Counter(
            next(iter(wilson_ust(g, root=0, rng=rng).tree_edges)) for _ in range(20000)
        )
        p = counts["heavy"] / 20000
        assert abs(p - 0.75) < 4 * math.sqrt(0.75 * 0.25 / 20000)


class TestBoundaryUst:
    @pytest.mark.parametrize("bc", ["wired", "free"])
    def test_spanning(self, bc):
        d = build_box_domain(2, 1.0, bc)
        rng = stream(9, 3)
        for _ in range(10):
            t = boundary_ust(d, rng)
            assert t.is_spanning_tree()

    def test_kernel_and_generic_agree_in_law(self):
        # small wired box: compiled path law vs generic python Wilson law
        d = build_rect_domain(3, 2, 1.0, "free")
        g = d.effective_graph
        trees = enumerate_spanning_trees(g)
        keys = sorted(frozenset(e.label for e in combo) for combo, _ in trees)
        idx = {k: i for i, k in enumerate(keys)}
        n = 15000
        rng = stream(10, 3)
        fast = Counter(idx[frozenset(boundary_ust(d, rng).tree_edges)] for _ in range(n))
        rng = stream(11, 3)
        slow = Counter(
            idx[frozenset(wilson_ust(g, root=(0, 0), rng=rng).tree_edges)]
            for _ in range(n)
        )
        obs = [fast.get(i, 0) for i in range(len(keys))]
        exp = [slow.get(i, 0) for i in range(len(keys))]
        total = [o + e for o, e in zip(obs, exp)]
        assert min(total) > 0
        # two-sample chi-square
        stat = sum((o - e) ** 2 / (o + e) for o, e in zip(obs, exp) if o + e)
        from scipy.stats import chi2

        p = 1 - chi2.cdf(stat, df=len(keys) - 1)
        assert p > 0.001

    def test_wired_tree_has_wired_root(self):
        d = build_box_domain(3, 1.0, "wired")
        t = boundary_ust(d, stream(12, 3))
        assert WIRED in t.graph.vertices


class TestDualTree:
    @pytest.mark.parametrize("bc", ["wired", "free"])
    @pytest.mark.parametrize("n", [2, 4])
    def test_complement_is_dual_spanning_tree(self, bc, n):
        d = build_box_domain(n, 1.0, bc)
        rng = stream(13, 4)
        for _ in range(20):
            t = boundary_ust(d, rng)
            dt = dual_tree(t, d)
            assert dt.is_spanning_tree()
            assert len(t.tree_edges) + len(dt.tree_edges) == len(d.effective_graph.edges)

    def test_rejects_non_tree(self):
        d = build_box_domain(2, 1.0, "wired")
        empty = SpanningForest(d.effective_graph, frozenset(), d)
        with pytest.raises(PreconditionError):
            dual_tree(empty, d)


class TestTreeBranch:
    def test_branch_endpoints_and_simplicity(self):
        d = build_box_domain(3, 1.0, "free")
        t = boundary_ust(d, stream(14, 5))
        b = tree_branch(t, (-2, -2), (2, 2))
        assert b.vertices[0] == (-2, -2)
        assert b.vertices[-1] == (2, 2)
        assert len(set(b.vertices)) == len(b.vertices)

    def test_branch_edges_in_tree(self):
        d = build_box_domain(2, 1.0, "free")
        t = boundary_ust(d, stream(15, 5))
        b = tree_branch(t, (0, 0), (2, 2))
        for u, v in zip(b.vertices, b.vertices[1:]):
            lab = (u, v) if (u, v) in t.tree_edges else (v, u)
            assert lab in t.tree_edges

    def test_separated_vertices_rejected(self):
        d = build_box_domain(2, 1.0, "free")
        empty = SpanningForest(d.effective_graph, frozenset(), d)
        with pytest.raises(ComponentError):
            tree_branch(empty, (0, 0), (1, 1))
