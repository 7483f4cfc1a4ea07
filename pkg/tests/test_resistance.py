import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citeresist.errors import DisconnectedError, DomainError
from citeresist.exact import exact_all_pairs, exact_resistance
from citeresist.graph import Weighting, build_graph
from citeresist.resistance import (
    SolverConfig,
    Sweep,
    VoltageState,
    all_pairs_resistance,
    current_bounds,
    iterate_voltages,
    resistance_between,
)
from citeresist.synthetic import connected_test_graph

from conftest import make_graph

class TestIterateVoltages:
    def test_path_first_sweep(self):
        g = build_graph([("p", "a"), ("a", "g")])
        s1 = iterate_voltages(g, VoltageState.initial(g, "p", "g"))
        np.testing.assert_array_equal(s1.voltages, [1.0, 0.5, 0.0])
        assert s1.iteration == 1

    def test_path_fixed_point(self):
        g = build_graph([("p", "a"), ("a", "g")])
        s2 = iterate_voltages(g, iterate_voltages(g, VoltageState.initial(g, "p", "g")))
        np.testing.assert_array_equal(s2.voltages, [1.0, 0.5, 0.0])

    def test_star(self):
        g = build_graph([("p", "a"), ("g", "a"), ("b", "a")])
        s1 = iterate_voltages(g, VoltageState.initial(g, "p", "g"))
        assert s1.voltages[g.node("a")] == pytest.approx(1 / 3)
        assert s1.voltages[g.node("b")] == 0.0

    def test_in_place_reads_fresh_values(self):
        # order p, a, b, g: in-place, b already sees a's new voltage
        g = build_graph([("p", "a"), ("a", "b"), ("b", "g")])
        s = VoltageState.initial(g, "p", "g")
        jac = iterate_voltages(g, s, Sweep.SIMULTANEOUS)
        gs = iterate_voltages(g, s, Sweep.IN_PLACE)
        assert jac.voltages[g.node("b")] == 0.0
        assert gs.voltages[g.node("b")] == pytest.approx(0.25)

    def test_poles_untouched(self):
        g = connected_test_graph(1, n_nodes=(20, 40))
        s = VoltageState.initial(g, 0, 5)
        for _ in range(5):
            s = iterate_voltages(g, s)
            assert s.voltages[0] == 1.0 and s.voltages[5] == 0.0
            assert np.all((s.voltages >= 0) & (s.voltages <= 1))


class TestCurrentBounds:
    def test_path_fixed_point(self):
        g = build_graph([("p", "a"), ("a", "g")])
        s = iterate_voltages(g, VoltageState.initial(g, "p", "g"))
        assert current_bounds(g, s) == (0.5, 0.5)

    def test_zero_start(self):
        g = make_graph([("p", "a"), ("a", "g"), ("p", "g")], {("p", "g"): 0.3, ("p", "a"): 2.0})
        s = VoltageState.initial(g, "p", "g")
        i_p, i_g = current_bounds(g, s)
        assert i_p == pytest.approx(2.3)
        assert i_g == pytest.approx(0.3)

    def test_zero_start_no_direct_edge(self):
        g = build_graph([("p", "a"), ("a", "g")])
        assert current_bounds(g, VoltageState.initial(g, "p", "g")) == (1.0, 0.0)

    def test_direct_edge_only(self):
        g = build_graph([("p", "g")])
        s = iterate_voltages(g, VoltageState.initial(g, "p", "g"))
        assert current_bounds(g, s) == (1.0, 1.0)


class TestResistanceBetween:
    @pytest.mark.parametrize("w", [1.0, 0.25, 3.0])
    def test_single_edge(self, w):
        g = make_graph([("p", "q")], {("p", "q"): w})
        r = resistance_between(g, "p", "q")
        assert r.resistance == 1 / w
        assert r.iterations == 1 and r.converged

    def test_series(self):
        r = resistance_between(build_graph([("p", "a"), ("a", "q")]), "p", "q")
        assert r.resistance == 2.0

    def test_four_cycle_opposite(self):
        g = build_graph([("p", "a"), ("a", "q"), ("q", "b"), ("b", "p")])
        assert resistance_between(g, "p", "q").resistance == 1.0

    def test_four_cycle_adjacent(self):
        g = build_graph([("p", "a"), ("a", "q"), ("q", "b"), ("b", "p")])
        r = resistance_between(g, "p", "a", SolverConfig(1e-6))
        assert abs(r.resistance - 0.75) <= 1e-6 / 2

    def test_result_invariant(self):
        g = connected_test_graph(2)
        r = resistance_between(g, 0, 7, SolverConfig(1e-3))
        assert r.lower_bound <= r.resistance <= r.upper_bound
        assert r.converged and r.upper_bound - r.lower_bound < 1e-3

    def test_matches_oracle_50_nodes(self):
        g = connected_test_graph(7, n_nodes=(45, 55))
        cfg = SolverConfig(1e-4)
        rng = np.random.default_rng(0)
        for _ in range(20):
            p, q = rng.choice(g.n_nodes, 2, replace=False)
            assert abs(resistance_between(g, p, q, cfg).resistance - exact_resistance(g, p, q)) < 1e-4

    def test_gauss_seidel_matches_oracle(self):
        g = connected_test_graph(8, n_nodes=(40, 80))
        cfg = SolverConfig(1e-5, sweep=Sweep.IN_PLACE)
        jac = SolverConfig(1e-5)
        for p, q in [(0, 1), (2, 30), (5, 11)]:
            gs = resistance_between(g, p, q, cfg)
            assert abs(gs.resistance - exact_resistance(g, p, q)) < 1e-5
            assert gs.iterations <= resistance_between(g, p, q, jac).iterations

    def test_same_pole(self):
        with pytest.raises(DomainError):
            resistance_between(build_graph([("p", "q")]), "p", "p")

    def test_disconnected(self):
        g = build_graph([("p", "a"), ("q", "b")])
        with pytest.raises(DisconnectedError):
            resistance_between(g, "p", "q")

    def test_restricted_to_component(self):
        g = build_graph([("p", "a"), ("a", "q"), ("x", "y"), ("y", "z")])
        assert resistance_between(g, "p", "q").resistance == 2.0

    def test_not_converged(self):
        g = build_graph([("p", "a"), ("a", "b"), ("b", "q")])
        r = resistance_between(g, "p", "q", SolverConfig(1e-3, max_iterations=1))
        assert not r.converged
        assert r.iterations == 1
        assert r.lower_bound == 2.0 and math.isinf(r.upper_bound)
        assert math.isinf(r.resistance)

    def test_not_converged_bounds_still_bracket(self):
        g = connected_test_graph(4)
        exact = exact_resistance(g, 0, 9)
        r = resistance_between(g, 0, 9, SolverConfig(1e-12, max_iterations=5))
        assert not r.converged
        assert r.lower_bound <= exact <= r.upper_bound

    def test_history_matches_stepwise_route(self):
        g = connected_test_graph(5, n_nodes=(30, 60))
        r = resistance_between(g, 1, 4, SolverConfig(1e-3), record_history=True)
        s = VoltageState.initial(g, 1, 4)
        for t in range(r.iterations):
            s = iterate_voltages(g, s)
            i_p, i_g = current_bounds(g, s)
            np.testing.assert_allclose(r.history[t], [1 / i_p, 1 / i_g if i_g else np.inf], rtol=1e-12)


class TestAllPairs:
    def test_three_papers(self):
        g = build_graph([("p1", "s"), ("p2", "s"), ("p3", "s"), ("p1", "t"), ("p3", "t")])
        m = all_pairs_resistance(g)
        assert len(m) == 3 and m.ids == ("p1", "p2", "p3")

    def test_path(self):
        m = all_pairs_resistance(build_graph([("p1", "s"), ("p2", "s")]))
        assert m.ids == ("p1", "p2")
        assert list(m.resistance) == [2.0]

    def test_twenty_papers_vs_oracle(self):
        g = connected_test_graph(11, n_nodes=(60, 120))
        papers = g.papers[:20]
        eps = 1e-3
        m = all_pairs_resistance(g, papers, SolverConfig(eps))
        e = exact_all_pairs(g, papers)
        assert m.n == 20 and len(m) == 190
        assert np.abs(m.resistance - e.resistance).max() <= eps
        assert np.all(m.lower <= e.resistance + 1e-9) and np.all(e.resistance <= m.upper + 1e-9)

    def test_parallelism_does_not_change_output(self):
        g = connected_test_graph(12)
        a = all_pairs_resistance(g, None, SolverConfig(1e-3), parallelism=1)
        b = all_pairs_resistance(g, None, SolverConfig(1e-3), parallelism=3)
        for name in ("resistance", "lower", "upper", "iterations", "converged"):
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name))

    def test_disconnected_papers_report(self):
        g = build_graph([("p1", "s"), ("p2", "s"), ("p3", "t"), ("p4", "t")])
        with pytest.raises(DisconnectedError) as exc:
            all_pairs_resistance(g)
        assert sorted(map(sorted, exc.value.components.values())) == [["p1", "p2"], ["p3", "p4"]]

    def test_needs_two_papers(self):
        with pytest.raises(DomainError):
            all_pairs_resistance(build_graph([("p1", "s")]))


graph_seeds = st.integers(min_value=0, max_value=10_000)


@settings(max_examples=25, deadline=None)
@given(graph_seeds, st.data())
def test_bounds_monotone_and_bracketing(seed, data):
    g = connected_test_graph(seed, n_nodes=(10, 60))
    p, q = data.draw(st.lists(st.integers(0, g.n_nodes - 1), min_size=2, max_size=2, unique=True))
    r = resistance_between(g, p, q, SolverConfig(1e-6), record_history=True)
    exact = exact_resistance(g, p, q)
    lo, hi = r.history[:, 0], r.history[:, 1]
    assert np.all(np.diff(lo) >= 0)
    finite = np.isfinite(hi)
    assert np.all(np.diff(hi[finite]) <= 0)
    assert np.all(lo <= exact * (1 + 1e-10))
    assert np.all(hi >= exact * (1 - 1e-10))


@settings(max_examples=15, deadline=None)
@given(graph_seeds)
def test_symmetry_and_triangle(seed):
    g = connected_test_graph(seed, n_nodes=(10, 60))
    eps = 1e-3
    cfg = SolverConfig(eps)
    rng = np.random.default_rng(seed)
    a, b, c = rng.choice(g.n_nodes, 3, replace=False)
    r = {}
    for x, y in itertools.permutations((a, b, c), 2):
        r[x, y] = resistance_between(g, x, y, cfg).resistance
    for x, y in itertools.combinations((a, b, c), 2):
        assert abs(r[x, y] - r[y, x]) <= 2 * eps
    assert r[a, c] <= r[a, b] + r[b, c] + 3 * eps


@settings(max_examples=15, deadline=None)
@given(graph_seeds, st.floats(min_value=0.05, max_value=20.0))
def test_scale_covariance(seed, lam):
    g = connected_test_graph(seed, n_nodes=(10, 50))
    eps = 1e-3
    scaled = g.with_link_weights(g.link_weight * lam)
    r1 = resistance_between(g, 0, 1, SolverConfig(eps)).resistance
    # tolerance scaled with the resistances themselves
    r2 = resistance_between(scaled, 0, 1, SolverConfig(eps / lam)).resistance
    assert abs(r2 - r1 / lam) <= 2 * eps / lam
    # same absolute tolerance: each midpoint is within half its own epsilon
    r3 = resistance_between(scaled, 0, 1, SolverConfig(eps)).resistance
    assert abs(r3 - r1 / lam) <= eps / 2 + eps / (2 * lam)


@settings(max_examples=15, deadline=None)
@given(graph_seeds)
def test_leaf_irrelevance(seed):
    g = connected_test_graph(seed, n_nodes=(10, 60))
    leaves = np.flatnonzero(g.degree == 1)
    if len(leaves) == 0:
        return
    others = np.setdiff1d(np.arange(g.n_nodes), leaves)
    if len(others) < 2:
        return
    p, q = others[0], others[-1]
    eps = 1e-4
    full = resistance_between(g, p, q, SolverConfig(eps)).resistance
    sub = g.subgraph(np.setdiff1d(np.arange(g.n_nodes), leaves[:1]))
    pruned = resistance_between(sub, g.ids[p], g.ids[q], SolverConfig(eps)).resistance
    assert abs(full - pruned) <= eps


def test_unit_weighting_graph():
    g = connected_test_graph(9, weighting=Weighting.UNIT)
    assert g.weighting is Weighting.UNIT
    r = resistance_between(g, 0, 3, SolverConfig(1e-4))
    assert abs(r.resistance - exact_resistance(g, 0, 3)) < 1e-4
