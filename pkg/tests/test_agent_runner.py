"""Reference runner correctness via scripted endpoint stubs."""

from __future__ import annotations

import pytest

import gridbench as gb
from gridbench import artifacts
from gridbench.agent_runner import (
    AgentRunConfig,
    EndpointError,
    SYSTEM_PROMPT,
    action_menu,
    frames_to_text,
    observation_message,
    parse_reply,
    run_environment,
    run_reference_agent,
)
from gridbench.engine import ActionKind
from gridbench.recording import replay


class SolutionTransport:
    """Replies with the committed solution, one action per turn."""

    def __init__(self, game_id: str):
        rec = artifacts.load_recording(game_id, "optimal")
        self.tokens = [gb.format_action(e.action) for e in rec.actions]
        self.i = 0

    def __call__(self, system, turns):
        token = self.tokens[self.i]
        self.i += 1
        if token.startswith("select:"):
            coords = token.split(":")[1].replace(",", " ")
            return f"I will click there. select {coords}"
        return f"Considering the board, my move: {token}"


class ConstantTransport:
    def __call__(self, system, turns):
        return "key1"


class FlakyTransport:
    """Fails transport twice, then forwards to the inner transport."""

    def __init__(self, inner, failures=2):
        self.inner = inner
        self.remaining = failures
        self.calls = 0

    def __call__(self, system, turns):
        self.calls += 1
        if self.remaining > 0:
            self.remaining -= 1
            raise ConnectionError("synthetic outage")
        return self.inner(system, turns)


class GarbageThenSolutionTransport(SolutionTransport):
    def __init__(self, game_id):
        super().__init__(game_id)
        self.garbage_sent = False

    def __call__(self, system, turns):
        if not self.garbage_sent:
            self.garbage_sent = True
            return "hmm, interesting board you have there"
        return super().__call__(system, turns)


def _config(*games):
    return AgentRunConfig(dataset=tuple(games), seed=0)


def test_solution_stub_scores_perfect():
    baselines = artifacts.available_baselines()
    result = run_reference_agent(
        _config("smp1"), baselines, transport=SolutionTransport("smp1"), sleep=lambda s: None
    )
    run = result.runs[0]
    assert run.scorecard.environment == 1.0
    assert run.recording.outcome == "win"
    assert replay(run.recording).identical
    assert run.cutoff_level is None


def test_total_across_dataset():
    baselines = artifacts.available_baselines()

    class PerGame:
        def __init__(self):
            self.inner = {}

        def __call__(self, system, turns):
            raise AssertionError("unused")

    result_smp1 = run_reference_agent(
        _config("smp1"), baselines, transport=SolutionTransport("smp1"), sleep=lambda s: None
    )
    result_smp2 = run_reference_agent(
        _config("smp2"), baselines, transport=SolutionTransport("smp2"), sleep=lambda s: None
    )
    assert result_smp1.total == result_smp2.total == 1.0


def test_constant_action_stub_hits_exact_cutoff():
    baselines = artifacts.available_baselines()
    baseline = baselines["smp1"]
    run = run_environment(
        "smp1", baseline, _config("smp1"), ConstantTransport(), sleep=lambda s: None
    )
    budget = gb.cutoff_budget(baseline.h_for(1))
    assert run.cutoff_level == 1
    assert run.recording.level_action_counts() == {1: budget}
    assert run.recording.outcome == "incomplete"
    assert all(r.actions is None and r.score == 0.0 for r in run.scorecard.levels)
    assert run.scorecard.environment == 0.0


def test_transport_retries_do_not_count_actions():
    baselines = artifacts.available_baselines()
    flaky = FlakyTransport(SolutionTransport("smp1"))
    run = run_environment(
        "smp1", baselines["smp1"], _config("smp1"), flaky, sleep=lambda s: None
    )
    assert run.scorecard.environment == 1.0  # same action count as clean run
    optimal = artifacts.load_recording("smp1", "optimal")
    assert run.recording.level_action_counts() == optimal.level_action_counts()


def test_endpoint_error_after_bounded_retries():
    class AlwaysDown:
        def __call__(self, system, turns):
            raise ConnectionError("down")

    baselines = artifacts.available_baselines()
    with pytest.raises(EndpointError):
        run_environment(
            "smp1", baselines["smp1"], _config("smp1"), AlwaysDown(), sleep=lambda s: None
        )


def test_unparseable_reply_gets_reminder_then_proceeds():
    baselines = artifacts.available_baselines()
    transport = GarbageThenSolutionTransport("smp1")
    run = run_environment(
        "smp1", baselines["smp1"], _config("smp1"), transport, sleep=lambda s: None
    )
    # The garbage turn consumed the first solution token via the retry,
    # so the run still wins with the same number of counted actions.
    assert run.recording.outcome == "win"


def test_parse_reply_takes_last_token():
    action_set = frozenset({ActionKind.KEY1, ActionKind.KEY2, ActionKind.SELECT})
    assert parse_reply("key1 then key2", action_set) == gb.KEY2
    assert parse_reply("I choose KEY1", action_set) == gb.KEY1
    assert parse_reply("select 10 34", action_set) == gb.select(10, 34)
    assert parse_reply("select(3, 4)", action_set) == gb.select(3, 4)
    assert parse_reply("maybe key5? no: key2", action_set) == gb.KEY2  # key5 undeclared
    assert parse_reply("select 99 99 is out of range", action_set) is None
    assert parse_reply("no action here", action_set) is None


def test_prompt_assembly_is_pure_and_neutral():
    s = gb.open_session("smp1", 0)
    frames = s.frames()
    a = observation_message(frames, s.spec.action_set)
    b = observation_message(frames, s.spec.action_set)
    assert a == b
    assert "Available actions:" in a
    first_line = frames_to_text(frames).splitlines()[0]
    assert all(tok.isdigit() for tok in first_line.split())
    # No goal text or strategy hints anywhere in the fixed prompt.
    assert "push" not in (SYSTEM_PROMPT + action_menu(s.spec.action_set)).lower()


def test_config_validation():
    with pytest.raises(ValueError):
        AgentRunConfig(dataset=())
    with pytest.raises(ValueError):
        AgentRunConfig(dataset=("smp1",), cutoff_multiplier=0)
    with pytest.raises(ValueError):
        run_reference_agent(
            _config("tiny"), {}, transport=ConstantTransport(), sleep=lambda s: None
        )
