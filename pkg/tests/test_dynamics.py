"""Poissonian cutting schedules, forest snapshots, interface lengths."""

import math

import numpy as np
import pytest

from ustlab.dynamics import (
    CutSchedule,
    cut_out_length,
    cut_rate,
    first_cut_on_branch,
    forest_at,
    interface_cycle,
    interface_length,
    sample_cut_schedule,
)
from ustlab.errors import PreconditionError
from ustlab.lattice import build_box_domain
from ustlab.rng import stream
from ustlab.sampling import boundary_ust, dual_tree, tree_branch


@pytest.fixture
def wired_tree():
    d = build_box_domain(3, 1.0, "wired")
    t = boundary_ust(d, stream(20, 6))
    return d, t


class TestSchedule:
    def test_rate_scales_with_mesh(self):
        assert cut_rate(1.0) == 1.0
        assert cut_rate(0.5) == pytest.approx(0.5**1.25)

    def test_times_negative_and_complete(self, wired_tree):
        d, t = wired_tree
        sched = sample_cut_schedule(t, d.mesh, stream(21, 6))
        assert set(sched.times) == set(t.tree_edges)
        assert all(tau < 0 for tau in sched.times.values())

    def test_mean_cut_time(self):
        # -tau ~ Exp(rate): empirical mean of -tau approx 1/rate
        d = build_box_domain(6, 1.0, "wired")
        t = boundary_ust(d, stream(22, 6))
        sched = sample_cut_schedule(t, d.mesh, stream(23, 6))
        taus = np.array(list(sched.times.values()))
        assert abs((-taus).mean() - 1.0) < 4 / math.sqrt(len(taus))

    def test_cut_edges_monotone_in_t(self, wired_tree):
        d, t = wired_tree
        sched = sample_cut_schedule(t, d.mesh, stream(24, 6))
        # cut_edges(t) = edges removed during (t, 0]: larger for earlier t
        assert sched.cut_edges(-0.1) <= sched.cut_edges(-0.5)
        assert sched.cut_edges(0.0) == set()


class TestForestAt:
    def test_nested_snapshots(self, wired_tree):
        d, t = wired_tree
        sched = sample_cut_schedule(t, d.mesh, stream(25, 6))
        f1 = forest_at(t, sched, -1.0)
        f2 = forest_at(t, sched, -0.2)
        assert f1.tree_edges <= f2.tree_edges <= t.tree_edges

    def test_initial_state_is_tree(self, wired_tree):
        d, t = wired_tree
        sched = sample_cut_schedule(t, d.mesh, stream(26, 6))
        assert forest_at(t, sched, 0.0).tree_edges == t.tree_edges

    def test_infinite_past_is_edgeless(self, wired_tree):
        d, t = wired_tree
        sched = sample_cut_schedule(t, d.mesh, stream(27, 6))
        assert forest_at(t, sched, -math.inf).tree_edges == frozenset()

    def test_positive_time_rejected(self, wired_tree):
        d, t = wired_tree
        sched = sample_cut_schedule(t, d.mesh, stream(28, 6))
        with pytest.raises(PreconditionError):
            forest_at(t, sched, 0.5)


class TestFirstCut:
    def test_none_when_branch_uncut(self):
        sched = CutSchedule(times={"a": -5.0, "b": -7.0}, rate=1.0)
        assert first_cut_on_branch(sched, ["a", "b"], -1.0) is None

    def test_latest_cut_wins(self):
        sched = CutSchedule(times={"a": -0.4, "b": -0.2, "c": -3.0}, rate=1.0)
        assert first_cut_on_branch(sched, ["a", "b", "c"], -1.0) == "b"


class TestInterface:
    def test_cycle_on_small_box(self):
        d = build_box_domain(2, 1.0, "wired")
        t = boundary_ust(d, stream(29, 7))
        dt = dual_tree(t, d)
        e = next(iter(t.tree_edges))
        cyc = interface_cycle(t, dt, e)
        assert cyc["edge_count"] == len(cyc["edges"]) >= 1
        assert cyc["renormalized_length"] == pytest.approx(
            cyc["edge_count"] * d.mesh**1.25
        )

    def test_cycle_contains_dual_partner(self):
        d = build_box_domain(2, 1.0, "wired")
        t = boundary_ust(d, stream(30, 7))
        dt = dual_tree(t, d)
        e = next(iter(sorted(t.tree_edges)))
        cyc = interface_cycle(t, dt, e)
        assert d.dual_bijection[e] in cyc["edges"]

    def test_component_interface_length(self, wired_tree):
        d, t = wired_tree
        sched = sample_cut_schedule(t, d.mesh, stream(31, 7))
        f = forest_at(t, sched, -2.0)
        ncomp = len(f.components)
        if ncomp >= 2:
            total = sum(
                interface_length(f, i, j)
                for i in range(ncomp)
                for j in range(i + 1, ncomp)
            )
            boundary_edges = sum(
                1
                for e in d.effective_graph.edges
                if f.component_of(e.u) != f.component_of(e.v)
            )
            assert total == pytest.approx(boundary_edges * d.mesh**1.25)


class TestCutOutLength:
    def _setup(self, seed):
        d = build_box_domain(4, 1.0, "wired")
        t = boundary_ust(d, stream(seed, 8))
        dt = dual_tree(t, d)
        sched = sample_cut_schedule(t, d.mesh, stream(seed + 1, 8))
        e = max(sched.times, key=sched.times.get)  # surviving edge at most times
        return d, t, dt, sched, e

    def test_monotone_in_eps(self):
        d, t, dt, sched, e = self._setup(40)
        t0 = 2 * sched.times[e]  # e is cut during (t0, 0]
        vals = [cut_out_length(t, dt, sched, e, t0, eps, 0.01) for eps in (0.5, 2.0, 8.0)]
        assert vals == sorted(vals)

    def test_vanishes_as_eps_to_zero(self):
        d, t, dt, sched, e = self._setup(42)
        assert cut_out_length(t, dt, sched, e, 2 * sched.times[e], 1e-9, 0.01) == 0.0

    def test_uncut_edge_rejected(self):
        d, t, dt, sched, e = self._setup(44)
        with pytest.raises(PreconditionError):
            # t after e's cut time: e is not a (t, 0] cut edge
            cut_out_length(t, dt, sched, e, sched.times[e] / 2, 1.0, 0.01)
