"""Harness-free reference runner for model-driven evaluation.

The runner contains no strategy, memory tooling, or per-environment
logic: every turn it sends the fixed system prompt, the latest frames
rendered as plain integer grids, and the list of available action
tokens, then executes the last well-formed action token found in the
model's reply. The full reply is carried into the next turn's context.
Prompt assembly is a pure function of (frames, action set), so the
neutrality of the runner is inspectable.

Transport failures are retried with bounded backoff and are never
counted as actions; only submitted engine steps count. A reply with no
parseable action is resubmitted once with a format reminder, after
which the first declared action kind is submitted (counted) so the run
always makes progress. Per level, the runner cuts the agent off at
``multiplier`` times the human baseline; the level is then recorded
unsolved and the environment run ends, since later levels are
unreachable.
"""

from __future__ import annotations

import os
import re
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence

import numpy as np

from .engine import (
    Action,
    ActionKind,
    FrameSeq,
    Session,
    SessionStatus,
    kind_action,
)
from .recording import Recorder, Recording
from .scoring import (
    DEFAULT_CUTOFF_MULTIPLIER,
    HumanBaseline,
    Scorecard,
    cutoff_budget,
    score_level_counts,
    total_score,
)

SYSTEM_PROMPT = (
    "You are playing a game. Your goal is to win. Reply with the exact action "
    "you want to take. The final action in your reply will be executed next "
    "turn. Your entire reply will be carried to the next turn."
)

FORMAT_REMINDER = (
    "Your previous reply contained no action token. Reply with exactly one of "
    "the available actions listed above (for example: key1, or select 12 34)."
)


class EndpointError(Exception):
    """The model endpoint stayed unreachable through all retries."""


class ChatTransport(Protocol):
    def __call__(self, system: str, turns: Sequence[dict]) -> str:
        ...


@dataclass(frozen=True)
class AgentRunConfig:
    """How to drive one model across a dataset of environments."""

    dataset: tuple[str, ...]
    endpoint_url: str = ""
    api_key_env: str = "GRIDBENCH_API_KEY"  # name of the credential variable
    model: str = ""
    cutoff_multiplier: int = DEFAULT_CUTOFF_MULTIPLIER
    system_prompt: str = SYSTEM_PROMPT
    seed: int = 0
    max_transport_retries: int = 3
    retry_backoff_seconds: float = 0.5

    def __post_init__(self) -> None:
        if not self.dataset:
            raise ValueError("dataset must name at least one environment")
        if self.cutoff_multiplier < 1:
            raise ValueError("cutoff multiplier must be >= 1")


# -- prompt assembly (pure) --------------------------------------------------


def frames_to_text(frames: FrameSeq) -> str:
    """Each frame as 64 lines of 64 space-separated integers."""
    blocks = []
    for frame in frames:
        rows = [" ".join(str(int(v)) for v in row) for row in np.asarray(frame)]
        blocks.append("\n".join(rows))
    return "\n\n".join(blocks)


def action_menu(action_set) -> str:
    tokens = []
    for kind in sorted(action_set, key=lambda k: k.value):
        if kind is ActionKind.SELECT:
            tokens.append("select X Y (X and Y between 0 and 63)")
        else:
            tokens.append(kind.value)
    return ", ".join(tokens)


def observation_message(frames: FrameSeq, action_set) -> str:
    return (
        frames_to_text(frames)
        + "\n\nAvailable actions: "
        + action_menu(action_set)
    )


# -- reply parsing ------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\b(key[1-5]|undo|reset)\b"
    r"|\bselect[\s:(]+(\d{1,2})[\s,]+(\d{1,2})\)?",
    re.IGNORECASE,
)


def parse_reply(reply: str, action_set) -> Optional[Action]:
    """The last well-formed action token in the reply, if any."""
    chosen: Optional[Action] = None
    for m in _TOKEN_RE.finditer(reply):
        if m.group(1):
            kind = ActionKind(m.group(1).lower())
            if kind in action_set:
                chosen = kind_action(kind)
        else:
            x, y = int(m.group(2)), int(m.group(3))
            if ActionKind.SELECT in action_set and x < 64 and y < 64:
                chosen = Action(ActionKind.SELECT, x, y)
    return chosen


# -- transports ---------------------------------------------------------------


class HttpChatTransport:
    """OpenAI-style chat-completions client over a base URL.

    The credential is read from the environment variable named in the
    config; nothing secret is ever written to disk or recordings.
    """

    def __init__(self, config: AgentRunConfig) -> None:
        import httpx

        self.config = config
        self._client = httpx.Client(timeout=120.0)

    def __call__(self, system: str, turns: Sequence[dict]) -> str:
        headers = {}
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.config.model,
            "messages": [{"role": "system", "content": system}, *turns],
        }
        response = self._client.post(
            self.config.endpoint_url, json=payload, headers=headers
        )
        response.raise_for_status()
        return response.json()["choices"][0]["message"]["content"]


def _call_with_retries(
    transport: ChatTransport,
    config: AgentRunConfig,
    turns: Sequence[dict],
    sleep: Callable[[float], None],
) -> str:
    last: Optional[Exception] = None
    for attempt in range(config.max_transport_retries + 1):
        try:
            return transport(config.system_prompt, turns)
        except Exception as exc:  # transport fault: retry, never an action
            last = exc
            if attempt < config.max_transport_retries:
                sleep(config.retry_backoff_seconds * (2**attempt))
    raise EndpointError(f"endpoint failed after {config.max_transport_retries + 1} attempts: {last}")


# -- the run loop -------------------------------------------------------------


@dataclass
class EnvironmentRun:
    game_id: str
    recording: Recording
    scorecard: Scorecard
    cutoff_level: Optional[int] = None  # level that hit the action budget


@dataclass
class AgentRunResult:
    runs: list[EnvironmentRun] = field(default_factory=list)

    @property
    def total(self) -> float:
        return total_score([r.scorecard.environment for r in self.runs])


def run_environment(
    game_id: str,
    baseline: HumanBaseline,
    config: AgentRunConfig,
    transport: ChatTransport,
    sleep: Callable[[float], None] = time.sleep,
) -> EnvironmentRun:
    session = Session.open(game_id, config.seed)
    recorder = Recorder(session, source="agent", participant=config.model or "agent")
    action_set = session.spec.action_set
    turns: list[dict] = []
    frames = session.frames()
    cutoff_level: Optional[int] = None
    solved: set[int] = set()

    while session.status in (SessionStatus.IN_PROGRESS, SessionStatus.LEVEL_COMPLETE):
        level = session.current_level
        budget = cutoff_budget(baseline.h_for(level), config.cutoff_multiplier)
        if session.level_action_count(level) >= budget:
            cutoff_level = level
            break

        turns.append({"role": "user", "content": observation_message(frames, action_set)})
        reply = _call_with_retries(transport, config, turns, sleep)
        turns.append({"role": "assistant", "content": reply})
        action = parse_reply(reply, action_set)
        if action is None:
            turns.append({"role": "user", "content": FORMAT_REMINDER})
            reply = _call_with_retries(transport, config, turns, sleep)
            turns.append({"role": "assistant", "content": reply})
            action = parse_reply(reply, action_set)
        if action is None:
            # Guaranteed progress: a well-defined, counted submission.
            action = kind_action(sorted(action_set, key=lambda k: k.value)[0])

        transition = recorder.step(action)
        frames = transition.frames
        if transition.level_completed:
            solved.add(level)

    recording = recorder.finalize()
    counts = recording.level_action_counts()
    scorecard = score_level_counts(
        {level: counts[level] for level in solved}, baseline
    )
    return EnvironmentRun(game_id, recording, scorecard, cutoff_level)


def run_reference_agent(
    config: AgentRunConfig,
    baselines: dict[str, HumanBaseline],
    transport: Optional[ChatTransport] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> AgentRunResult:
    """Drive the configured endpoint across the dataset, one env at a time."""
    if transport is None:
        transport = HttpChatTransport(config)
    result = AgentRunResult()
    for game_id in config.dataset:
        if game_id not in baselines:
            raise ValueError(f"no baseline available for {game_id!r}")
        result.runs.append(
            run_environment(game_id, baselines[game_id], config, transport, sleep)
        )
    return result
