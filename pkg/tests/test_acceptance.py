"""Acceptance suite: the release criteria, each at its stated tolerance.

Every test prints one `ACCEPTANCE <name>: PASS (<elapsed>)` line (run
pytest with -s to watch them stream) and enforces both the numeric
tolerance and the wall-clock budget of its criterion.
"""

from __future__ import annotations

import random
import time
from contextlib import contextmanager

import pytest

import gridbench as gb
from gridbench import artifacts
from gridbench.agent_runner import run_environment, run_reference_agent
from gridbench.engine import Action, ActionKind, Session, kind_action
from gridbench.regimes import RegimeConfig, RegimeKind, qualify
from gridbench.stategraph import Budgets, TERMINAL_GAME_OVER, WIN_TERMINALS, build_state_graph
from gridbench.winprob import binomial_interval, estimate_win_probability, monte_carlo_win_rate

from test_agent_runner import ConstantTransport, SolutionTransport


@contextmanager
def criterion(name: str, budget_seconds: float):
    started = time.perf_counter()
    yield
    elapsed = time.perf_counter() - started
    print(f"\nACCEPTANCE {name}: PASS ({elapsed:.2f}s / budget {budget_seconds:.0f}s)")
    assert elapsed < budget_seconds, f"{name} exceeded its {budget_seconds}s budget"


def test_golden_scoring_values():
    with criterion("scoring-golden-values", 1.0):
        assert gb.level_efficiency(10, 100) == 0.01  # exact float equality
        assert gb.level_efficiency(20, 2) == 1.0
        assert gb.level_weights(5) == [1 / 15, 2 / 15, 3 / 15, 4 / 15, 5 / 15]


def test_scoring_properties_randomized():
    with criterion("scoring-properties-10k", 10.0):
        rng = random.Random(20260809)
        for _ in range(10_000):
            h = rng.randint(1, 500)
            a = rng.randint(1, 5_000)
            n = rng.randint(1, 9)

            s = gb.level_efficiency(h, a)
            assert 0.0 <= s <= 1.0
            if a <= h:
                assert s == 1.0
            else:
                assert s == (h * h) / (a * a)  # power law, exactly
                assert gb.level_efficiency(h, 2 * a) * 4 == s  # doubling quarters
            assert gb.level_efficiency(h, a + 1) <= s  # monotone in actions
            if a >= h + 1:
                assert gb.level_efficiency(h + 1, a) >= s  # monotone in baseline

            weights = gb.level_weights(n)
            assert abs(sum(weights) - 1.0) < 1e-12
            scores = [rng.random() for _ in range(n)]
            e = gb.environment_score(scores)
            assert 0.0 <= e <= 1.0

        # Pipeline identity: the committed baseline replay scores 1.0.
        for gid in ("smp1", "smp2"):
            baseline = artifacts.load_baseline(gid)
            rec = artifacts.load_recording(gid, "baseline_replay")
            card = gb.score_recording(rec, baseline)
            assert card.environment == 1.0
            assert all(r.score == 1.0 for r in card.levels)


def test_graph_matches_oracle_with_bound_convergence():
    with criterion("graph-oracle-equivalence", 30.0):
        for level in (1, 2):
            oracle = gb.oracle_enumerate("tiny", level)
            graph = build_state_graph("tiny", level, Budgets(max_nodes=1_000_000))
            wp = estimate_win_probability(graph)
            assert graph.stats.fully_explored
            assert graph.stats.node_count == oracle.node_count
            assert graph.stats.edge_count == oracle.edge_count
            graph_wins = {graph.nodes[d].state for d in graph.terminal_digests(WIN_TERMINALS)}
            graph_losses = {
                graph.nodes[d].state for d in graph.terminal_digests((TERMINAL_GAME_OVER,))
            }
            assert graph_wins == {s for s, t in oracle.terminal_by_state.items() if t == "win"}
            assert graph_losses == {s for s, t in oracle.terminal_by_state.items() if t == "lose"}
            assert abs(wp.exact - oracle.win_probability) < 1e-10

        exact = gb.oracle_enumerate("tiny", 1).win_probability
        lowers, uppers = [], []
        for max_nodes in (2, 4, 8, 12, 16):
            wp = estimate_win_probability(
                build_state_graph("tiny", 1, Budgets(max_nodes=max_nodes))
            )
            assert wp.lower - 1e-10 <= exact <= wp.upper + 1e-10
            lowers.append(wp.lower)
            uppers.append(wp.upper)
        assert all(b >= a - 1e-10 for a, b in zip(lowers, lowers[1:]))
        assert all(b <= a + 1e-10 for a, b in zip(uppers, uppers[1:]))
        assert abs(lowers[-1] - exact) < 1e-10 and abs(uppers[-1] - exact) < 1e-10


def test_monte_carlo_consistency_one_million():
    with criterion("monte-carlo-1e6", 60.0):
        graph = build_state_graph("tiny", 1, Budgets(max_nodes=1_000_000))
        exact = estimate_win_probability(graph).exact
        mc = monte_carlo_win_rate(graph, 1_000_000, seed=7)
        lo, hi = binomial_interval(exact, mc.rollouts, confidence=0.99)
        assert lo <= mc.win_rate <= hi, (mc.win_rate, lo, hi)
        assert mc.capped == 0


def test_qualification_gate():
    with criterion("qualification-smp1-smp2-degn", 15 * 60.0):
        for gid in ("smp1", "smp2"):
            recordings = list(artifacts.list_recordings(gid).values())
            report = qualify(gid, recordings)
            assert report.passed, f"{gid} failed: {report.failures}"
            spec = gb.get_environment(gid).spec
            for regime in report.regimes:
                if regime.kind in (RegimeKind.SANITY_50K, RegimeKind.DEEP_1M):
                    non_tutorial_wins = sum(
                        wins
                        for level, wins in regime.wins_per_level.items()
                        if level != spec.tutorial_level_index
                    )
                    assert non_tutorial_wins == 0
            for check in report.thresholds:
                if not check.exempt_tutorial:
                    assert check.bound < 1e-4
            assert all(result.identical for _, result in report.replays)
            outcomes = {name.split("(")[-1].rstrip(")") for name, _ in report.replays}
            assert {"win", "loss"} <= outcomes

        degn_report = qualify(
            "degn",
            list(artifacts.list_recordings("degn").values()),
            regime_configs=[RegimeConfig(RegimeKind.SANITY_50K, 10_000, (0,))],
        )
        assert not degn_report.passed
        assert any("random-win bound" in f for f in degn_report.failures)


def test_replay_determinism_hundred_fold():
    with criterion("replay-determinism-100x", 60.0):
        total = 0
        for gid in ("smp1", "smp2", "tiny", "degn"):
            for name, recording in artifacts.list_recordings(gid).items():
                # Prefix check: the stored digest holds at every index.
                session = gb.open_session(recording.game_id, recording.seed)
                for entry in recording.actions:
                    assert session.step(entry.action).state_hash == entry.post_digest
                for _ in range(100):
                    assert gb.replay(recording).identical, f"{gid}/{name}"
                total += 1
        assert total >= 14


def test_throughput_thousand_steps_per_second():
    with criterion("engine-throughput", 60.0):
        rng = random.Random(1)
        kinds = [ActionKind.KEY1, ActionKind.KEY2, ActionKind.KEY3, ActionKind.KEY4,
                 ActionKind.SELECT]
        session = gb.open_session("smp1", 0)
        steps = 0
        started = time.perf_counter()
        while steps < 200_000:
            kind = kinds[rng.randrange(len(kinds))]
            if kind is ActionKind.SELECT:
                action = Action(kind, rng.randrange(64), rng.randrange(64))
            else:
                action = kind_action(kind)
            session.step(action)
            steps += 1
            if session.status not in (
                gb.SessionStatus.IN_PROGRESS, gb.SessionStatus.LEVEL_COMPLETE
            ):
                session = gb.open_session("smp1", 0)
        rate = steps / (time.perf_counter() - started)
        print(f"\n  measured stepping rate: {rate:,.0f} steps/s (target 1,000)")
        assert rate >= 1_000


def test_agent_runner_stub_endpoints():
    with criterion("agent-runner-stubs", 60.0):
        baselines = artifacts.available_baselines()

        for gid in ("smp1", "smp2"):
            from gridbench.agent_runner import AgentRunConfig

            result = run_reference_agent(
                AgentRunConfig(dataset=(gid,), seed=0),
                baselines,
                transport=SolutionTransport(gid),
                sleep=lambda s: None,
            )
            assert result.runs[0].scorecard.environment == 1.0

        from gridbench.agent_runner import AgentRunConfig

        baseline = baselines["smp1"]
        run = run_environment(
            "smp1", baseline, AgentRunConfig(dataset=("smp1",), seed=0),
            ConstantTransport(), sleep=lambda s: None,
        )
        assert run.cutoff_level == 1
        assert run.recording.level_action_counts() == {1: 5 * baseline.h_for(1)}
        assert run.scorecard.levels[0].actions is None
        assert run.scorecard.environment == 0.0
