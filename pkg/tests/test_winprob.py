"""Win-probability solver edge cases and the Monte Carlo cross-check."""

from __future__ import annotations

import pytest

import gridbench as gb
from gridbench.stategraph import Budgets, build_state_graph
from gridbench.winprob import (
    Method,
    binomial_interval,
    estimate_win_probability,
    monte_carlo_win_rate,
    zero_win_upper_bound,
)

FULL = Budgets(max_nodes=1_000_000)


def test_no_win_terminal_gives_exact_zero():
    # The crash fixture has no win condition at all.
    graph = build_state_graph("crsh", 1, FULL)
    wp = estimate_win_probability(graph)
    assert graph.stats.fully_explored
    assert wp.exact == 0.0


def test_win_only_absorption_gives_exact_one():
    # degn level 1 has no losing terminal; random play always gets there.
    graph = build_state_graph("degn", 1, FULL)
    wp = estimate_win_probability(graph)
    assert wp.exact == pytest.approx(1.0, abs=1e-10)


def test_degn_level2_gauntlet_probability():
    graph = build_state_graph("degn", 2, FULL)
    wp = estimate_win_probability(graph)
    assert wp.exact == pytest.approx(2.0 ** -9, abs=1e-12)
    oracle = gb.oracle_enumerate("degn", 2)
    assert abs(oracle.win_probability - wp.exact) < 1e-12


def test_monte_carlo_requires_full_exploration():
    graph = build_state_graph("tiny", 1, Budgets(max_nodes=4))
    with pytest.raises(ValueError):
        monte_carlo_win_rate(graph, 100)


def test_monte_carlo_matches_exact_on_tiny():
    graph = build_state_graph("tiny", 2, FULL)
    exact = estimate_win_probability(graph).exact
    mc = monte_carlo_win_rate(graph, 100_000, seed=11)
    lo, hi = binomial_interval(exact, mc.rollouts, confidence=0.99)
    assert lo <= mc.win_rate <= hi
    assert mc.capped == 0


def test_monte_carlo_deterministic_per_seed():
    graph = build_state_graph("tiny", 1, FULL)
    a = monte_carlo_win_rate(graph, 20_000, seed=3)
    b = monte_carlo_win_rate(graph, 20_000, seed=3)
    c = monte_carlo_win_rate(graph, 20_000, seed=4)
    assert a.wins == b.wins
    assert a.wins != c.wins  # different sampling path


def test_binomial_interval_shape():
    lo, hi = binomial_interval(0.5, 100, confidence=0.99)
    assert 0.0 <= lo < 0.5 < hi <= 1.0
    lo2, hi2 = binomial_interval(0.5, 10_000, confidence=0.99)
    assert hi2 - lo2 < hi - lo


def test_zero_win_upper_bound():
    assert zero_win_upper_bound(0) == 1.0
    b1 = zero_win_upper_bound(1_000)
    b2 = zero_win_upper_bound(100_000)
    assert 0 < b2 < b1 < 1
    # ~3/n rule of thumb for 95%.
    assert b1 == pytest.approx(3.0 / 1_000, rel=0.05)


def test_bounds_invariants_on_partial_graphs():
    for max_nodes in (2, 5, 9):
        graph = build_state_graph("degn", 2, Budgets(max_nodes=max_nodes))
        wp = estimate_win_probability(graph)
        assert wp.method is Method.FRONTIER_BOUNDS
        assert 0.0 <= wp.lower <= wp.upper <= 1.0
