"""Session lifecycle, action accounting, digests, and frame contracts."""

from __future__ import annotations

import random

import numpy as np
import pytest

import gridbench as gb
from gridbench.engine import Action, ActionKind, Session, SessionStatus, digest_of


def test_open_session_fresh_state():
    s = gb.open_session("smp1", seed=0)
    assert s.current_level == 1
    assert s.action_counts == [0]
    assert s.status is SessionStatus.IN_PROGRESS


def test_open_unknown_game_id():
    with pytest.raises(gb.UnknownGameId):
        gb.open_session("zzzz", seed=0)


def test_equal_seeds_equal_initial_digests():
    a = gb.open_session("smp1", seed=7)
    b = gb.open_session("smp1", seed=7)
    assert a.state_digest() == b.state_digest()
    np.testing.assert_array_equal(a.frames()[0], b.frames()[0])


def test_step_counts_and_returns_frames():
    s = gb.open_session("smp1", seed=0)
    t = s.step(gb.KEY1)
    assert s.action_counts == [1]
    assert t.action_was_valid
    assert len(t.frames) >= 1
    gb.validate_frame(t.frames[-1])


def test_noop_action_is_counted_self_transition():
    s = gb.open_session("smp1", seed=0)
    pre = s.state_digest()
    t = s.step(gb.select(0, 0))  # outside the board: guaranteed no effect
    assert not t.action_was_valid
    assert t.state_hash == pre
    assert s.action_counts == [1]


def test_unsupported_action_raises_and_does_not_count():
    s = gb.open_session("smp1", seed=0)
    with pytest.raises(gb.UnsupportedAction):
        s.step(gb.KEY5)
    assert s.action_counts == [0]


def test_winning_final_level_completes_environment(smp1_solution=None):
    from gridbench import artifacts

    rec = artifacts.load_recording("smp1", "optimal")
    s = gb.open_session("smp1", seed=rec.seed)
    last = None
    for entry in rec.actions:
        last = s.step(entry.action)
    assert last.environment_completed and last.level_completed
    assert s.status is SessionStatus.ENVIRONMENT_COMPLETE
    assert s.current_level == s.spec.level_count
    with pytest.raises(gb.SessionTerminal):
        s.step(gb.KEY1)


def test_level_win_emits_next_reset_frame():
    s = gb.open_session("smp1", seed=0)
    for _ in range(3):
        t = s.step(gb.KEY4)
    assert t.level_completed and not t.environment_completed
    assert s.current_level == 2
    next_reset = gb.open_session("smp1", seed=0)
    fresh = Session(s.env, 0, start_level=2)
    np.testing.assert_array_equal(t.frames[-1], fresh.frames()[0])
    assert s.action_counts == [3, 0]


def test_undo_inverse_pair():
    s = gb.open_session("smp1", seed=0)
    start = s.state_digest()
    s.step(gb.KEY1)
    t = s.undo()
    assert t.state_hash == start
    assert s.action_counts == [2]


def test_undo_at_reset_state_is_noop():
    s = gb.open_session("smp1", seed=0)
    t = s.undo()
    assert not t.action_was_valid
    assert s.action_counts == [1]


def test_double_undo_restores_initial_state():
    s = gb.open_session("smp1", seed=3)
    start = s.state_digest()
    s.step(gb.KEY1)
    s.step(gb.KEY2)
    s.undo()
    t = s.undo()
    assert t.state_hash == start


def test_undo_skips_noop_actions():
    s = gb.open_session("smp1", seed=0)
    s.step(gb.KEY1)
    after = s.state_digest()
    s.step(gb.select(0, 0))  # no-op: must not consume the undo slot
    t = s.undo()
    assert t.state_hash != after
    assert s.state_digest() == gb.open_session("smp1", 0).state_digest()


def test_undo_unsupported_when_not_declared():
    s = gb.open_session("tiny", seed=0)
    with pytest.raises(gb.UnsupportedAction):
        s.undo()


def test_reset_keeps_action_count():
    s = gb.open_session("smp1", seed=0)
    start = s.state_digest()
    for _ in range(5):
        s.step(gb.KEY1)
    t = s.reset_level()
    assert t.state_hash == start
    assert s.action_counts == [6]


def test_reset_at_reset_state():
    s = gb.open_session("smp1", seed=0)
    t = s.reset_level()
    assert not t.action_was_valid
    assert s.action_counts == [1]


def test_reset_clears_undo_history():
    s = gb.open_session("smp1", seed=0)
    s.step(gb.KEY1)
    s.reset_level()
    t = s.undo()
    assert not t.action_was_valid  # nothing to revert after a reset


def test_reset_does_not_resurrect_completed_level():
    s = gb.open_session("smp1", seed=0)
    for _ in range(3):
        s.step(gb.KEY4)
    assert s.current_level == 2
    s.reset_level()
    assert s.current_level == 2  # reset applies to the current level only


def test_digest_constant_without_actions():
    s = gb.open_session("smp2", seed=1)
    d = s.state_digest()
    for _ in range(3):
        assert s.state_digest() == d
        np.testing.assert_array_equal(s.frames()[0], s.frames()[0])


def test_determinism_digest_sequences_match():
    actions = [gb.KEY1, gb.KEY2, gb.KEY4, gb.select(10, 34), gb.KEY3, gb.UNDO]
    runs = []
    for _ in range(2):
        s = gb.open_session("smp1", seed=99)
        runs.append([s.step(a).state_hash for a in actions])
    assert runs[0] == runs[1]


def test_action_accounting_random_sequence():
    rng = random.Random(5)
    s = gb.open_session("smp2", seed=5)
    n = 0
    for _ in range(200):
        kind = rng.choice([ActionKind.KEY1, ActionKind.KEY2, ActionKind.KEY3, ActionKind.KEY4])
        t = s.step(Action(kind))
        n += 1
        if s.status is not SessionStatus.IN_PROGRESS:
            break
    assert sum(s.action_counts) == n
    assert len(s.action_counts) == len(s.levels_entered())


def test_select_bounds_validation():
    with pytest.raises(ValueError):
        Action(ActionKind.SELECT, 64, 0)
    with pytest.raises(ValueError):
        Action(ActionKind.SELECT, 0, -1)
    with pytest.raises(ValueError):
        Action(ActionKind.SELECT)
    with pytest.raises(ValueError):
        Action(ActionKind.KEY1, 3, 3)


def test_frame_validator_rejects_bad_frames():
    with pytest.raises(gb.MalformedFrame):
        gb.validate_frame(np.zeros((64, 63), dtype=np.uint8))
    with pytest.raises(gb.MalformedFrame):
        gb.validate_frame(np.full((64, 64), 16, dtype=np.uint8))
    with pytest.raises(gb.MalformedFrame):
        gb.validate_frame(np.zeros((64, 64), dtype=np.int32))
    gb.validate_frame(np.zeros((64, 64), dtype=np.uint8))


def test_action_token_round_trip():
    for token in ["key1", "key5", "undo", "reset", "select:12,34"]:
        assert gb.format_action(gb.parse_action(token)) == token
    with pytest.raises(ValueError):
        gb.parse_action("select:64,0")
    with pytest.raises(ValueError):
        gb.parse_action("jump")


def test_identical_frames_distinct_hidden_states_distinct_digests():
    env = gb.get_environment("degn")
    a, b = (1,), (2,)  # two mid-gauntlet stages render identically
    np.testing.assert_array_equal(env.render(2, a), env.render(2, b))
    assert digest_of(env, 2, a) != digest_of(env, 2, b)
