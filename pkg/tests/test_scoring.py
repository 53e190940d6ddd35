"""Efficiency scoring: worked examples, order statistics, file formats."""

from __future__ import annotations

import io

import pytest
from hypothesis import given, strategies as st

import gridbench as gb
from gridbench import artifacts
from gridbench.scoring import (
    AttemptFilterResult,
    EmptyDataset,
    EmptyLevelList,
    InsufficientSolvers,
    NonPositiveBaseline,
    ParticipantAttempt,
    baseline_fingerprint,
    dumps_baseline,
    read_baseline,
    score_recording,
    write_scorecard,
)


# -- level efficiency ---------------------------------------------------------


def test_worked_example_ten_vs_hundred():
    assert gb.level_efficiency(10, 100) == 0.01


def test_parity_scores_one():
    assert gb.level_efficiency(10, 10) == 1.0


def test_exploit_is_capped():
    assert gb.level_efficiency(20, 2) == 1.0


def test_unsolved_scores_zero():
    assert gb.level_efficiency(10, None) == 0.0


def test_non_positive_baseline_rejected():
    with pytest.raises(NonPositiveBaseline):
        gb.level_efficiency(0, 5)


@given(st.integers(1, 10_000), st.integers(1, 10_000))
def test_efficiency_range_and_cap(h, a):
    s = gb.level_efficiency(h, a)
    assert 0.0 <= s <= 1.0
    if a <= h:
        assert s == 1.0
    else:
        assert s == (h * h) / (a * a)


@given(st.integers(1, 5_000), st.integers(1, 5_000))
def test_doubling_actions_quarters_score(h, a):
    if a >= h:
        assert gb.level_efficiency(h, 2 * a) == pytest.approx(
            gb.level_efficiency(h, a) / 4
        )


# -- environment and total scores --------------------------------------------


def test_weights_for_five_levels():
    assert gb.level_weights(5) == [1 / 15, 2 / 15, 3 / 15, 4 / 15, 5 / 15]


def test_perfect_environment():
    assert gb.environment_score([1, 1, 1, 1, 1]) == 1.0


def test_weighted_partial_environment():
    assert gb.environment_score([1, 1, 1, 0, 0]) == 6 / 15


def test_last_level_contribution():
    for n in (1, 2, 5, 6, 9):
        scores = [0.0] * (n - 1) + [1.0]
        assert gb.environment_score(scores) == pytest.approx(2 / (n + 1))


def test_environment_score_rejects_empty():
    with pytest.raises(EmptyLevelList):
        gb.environment_score([])


def test_total_score_mean():
    assert gb.total_score([0.4]) == 0.4
    assert gb.total_score([0.2, 0.4]) == pytest.approx(0.3)
    with pytest.raises(EmptyDataset):
        gb.total_score([])


def test_permuting_levels_changes_weighted_score():
    assert gb.environment_score([1, 0, 0]) != gb.environment_score([0, 0, 1])


# -- attempt filter и cutoff --------------------------------------------------


def test_attempt_filter_boundaries():
    assert gb.attempt_filter(31, int(29.9 * 60_000)) == AttemptFilterResult(True)
    assert gb.attempt_filter(30, 10 * 60_000) == AttemptFilterResult(False, "too_few_actions")
    assert gb.attempt_filter(100, 31 * 60_000) == AttemptFilterResult(False, "too_long")
    assert gb.attempt_filter(100, 30 * 60_000) == AttemptFilterResult(False, "too_long")


def test_cutoff_budget():
    assert gb.cutoff_budget(10) == 50
    assert gb.cutoff_budget(1) == 5
    with pytest.raises(NonPositiveBaseline):
        gb.cutoff_budget(0)


# -- baseline extraction ------------------------------------------------------


def _attempt(pid, counts, solved=None, duration_min=10.0):
    total = sum(counts.values())
    return ParticipantAttempt(
        participant=pid,
        level_actions=counts,
        solved_levels=frozenset(solved if solved is not None else counts),
        total_actions=max(total, 31),
        duration_ms=int(duration_min * 60_000),
    )


def test_second_best_order_statistic():
    attempts = [
        _attempt("a", {1: 12, 2: 40}),
        _attempt("b", {1: 15, 2: 35}),
        _attempt("c", {1: 30, 2: 31}),
    ]
    baseline = gb.extract_baseline(attempts, "smp1", 2, (10, 30))
    assert baseline.h == (15, 35)
    assert baseline.best_first_run == (12, 31)


def test_ties_resolve_to_tied_value():
    attempts = [
        _attempt("a", {1: 12}),
        _attempt("b", {1: 12}),
        _attempt("c", {1: 30}),
    ]
    baseline = gb.extract_baseline(attempts, "smp1", 1, (12,))
    assert baseline.h == (12,)


def test_single_full_solver_insufficient():
    attempts = [
        _attempt("a", {1: 12, 2: 40}),
        _attempt("b", {1: 15, 2: 35}, solved={1}),  # never finished level 2
    ]
    with pytest.raises(InsufficientSolvers):
        gb.extract_baseline(attempts, "smp1", 2, (10, 30))


def test_per_level_solvers_widen_the_pool():
    # The third participant solved only level 1, but still competes there.
    attempts = [
        _attempt("a", {1: 20, 2: 40}),
        _attempt("b", {1: 25, 2: 35}),
        _attempt("c", {1: 10, 2: 99}, solved={1}),
    ]
    baseline = gb.extract_baseline(attempts, "smp1", 2, (5, 30))
    assert baseline.h == (20, 40)
    assert baseline.best_first_run == (10, 35)


def test_filtered_attempts_are_excluded():
    attempts = [
        _attempt("a", {1: 12}),
        _attempt("b", {1: 15}),
        _attempt("slow", {1: 9}, duration_min=45.0),  # over the hard cap
    ]
    baseline = gb.extract_baseline(attempts, "smp1", 1, (9,))
    assert baseline.h == (15,)


def test_baseline_invariant_enforced():
    with pytest.raises(ValueError):
        gb.HumanBaseline("smp1", h=(10,), best_first_run=(11,), optimal_reference=(5,))


# -- file formats and the committed pipeline ---------------------------------


def test_baseline_file_round_trip():
    baseline = artifacts.load_baseline("smp1")
    text = dumps_baseline(baseline)
    again = read_baseline(io.StringIO(text))
    assert again == baseline
    assert baseline_fingerprint(again) == baseline_fingerprint(baseline)


def test_committed_baselines_respect_order_invariant():
    for gid in ("smp1", "smp2"):
        baseline = artifacts.load_baseline(gid)
        for l in range(baseline.level_count):
            assert (
                baseline.optimal_reference[l]
                <= baseline.best_first_run[l]
                <= baseline.h[l]
            )


def test_pipeline_identity_baseline_replay_scores_one():
    for gid in ("smp1", "smp2"):
        baseline = artifacts.load_baseline(gid)
        rec = artifacts.load_recording(gid, "baseline_replay")
        card = score_recording(rec, baseline)
        assert all(r.score == 1.0 for r in card.levels)
        assert card.environment == 1.0


def test_unsolved_levels_score_zero_in_scorecard():
    baseline = artifacts.load_baseline("smp1")
    rec = artifacts.load_recording("smp1", "loss")  # dies on level 2
    card = score_recording(rec, baseline)
    assert card.levels[0].score > 0
    assert all(r.score == 0.0 and r.actions is None for r in card.levels[1:])


def test_scorecard_file_format():
    baseline = artifacts.load_baseline("smp1")
    rec = artifacts.load_recording("smp1", "optimal")
    card = score_recording(rec, baseline)
    buf = io.StringIO()
    write_scorecard(card, buf)
    text = buf.getvalue()
    assert text.startswith("gridscorecard 1\n")
    assert f"baseline {card.baseline_fingerprint}" in text
    assert "environment 1.0" in text  # optimal beats the baseline everywhere
