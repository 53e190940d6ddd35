"""Seeded action traces with bit-exact re-execution.

A recording stores the game, the session seed, and every submitted
action together with the state digest observed after it. Replaying
re-executes the trace on a fresh session and compares digests at every
index, so any divergence (corrupted file, changed environment
mechanics, broken determinism) is localized to the first differing
action. Timestamps are never replayed; they exist for duration
analytics on human sessions.

The file format is line-oriented text, one action per line, designed
to be diffable:

    gridrec 1
    game smp1
    seed 42
    source human
    participant p01
    action key4 1 04ca53... 1200
    ...
    outcome win
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Optional, TextIO

from .engine import (
    Action,
    FrameSeq,
    Session,
    SessionStatus,
    Transition,
    format_action,
    parse_action,
)
from .hashing import content_digest, digest_hex, parse_digest

OUTCOME_WIN = "win"
OUTCOME_LOSS = "loss"
OUTCOME_INCOMPLETE = "incomplete"

SOURCES = ("human", "agent", "authored")


class RecordingFormatError(Exception):
    pass


class IndexOutOfRange(Exception):
    pass


@dataclass(frozen=True)
class RecordedAction:
    action: Action
    pre_level: int
    post_digest: int
    t_ms: int  # wall-clock offset, informational only


@dataclass
class Recording:
    game_id: str
    seed: int
    source: str
    participant: str
    actions: list[RecordedAction] = field(default_factory=list)
    outcome: str = OUTCOME_INCOMPLETE

    def level_action_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for entry in self.actions:
            counts[entry.pre_level] = counts.get(entry.pre_level, 0) + 1
        return counts

    def solved_levels(self) -> set[int]:
        """Levels this trace completed (advanced past, or won the run on)."""
        solved = set()
        prev = None
        for entry in self.actions:
            if prev is not None and entry.pre_level > prev:
                solved.update(range(prev, entry.pre_level))
            prev = entry.pre_level
        if self.outcome == OUTCOME_WIN and prev is not None:
            solved.add(prev)
        return solved

    def total_actions(self) -> int:
        return len(self.actions)

    def duration_ms(self) -> int:
        return self.actions[-1].t_ms if self.actions else 0


class Recorder:
    """Wraps a session so every submitted action lands in a trace.

    ``clock_ms`` supplies the per-action timestamp offsets; inject a
    counter for reproducible fixtures.
    """

    def __init__(
        self,
        session: Session,
        source: str = "agent",
        participant: str = "-",
        clock_ms: Optional[Callable[[], int]] = None,
    ) -> None:
        if source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}")
        if session.first_level != 1:
            raise ValueError("recordings must start at level 1")
        self.session = session
        self._clock = clock_ms or _monotonic_ms()
        self.recording = Recording(
            game_id=session.spec.game_id,
            seed=session.seed,
            source=source,
            participant=participant,
        )

    def step(self, action: Action) -> Transition:
        pre_level = self.session.current_level
        transition = self.session.step(action)
        self.recording.actions.append(
            RecordedAction(action, pre_level, transition.state_hash, self._clock())
        )
        return transition

    def finalize(self) -> Recording:
        self.recording.outcome = _outcome_of(self.session.status)
        return self.recording


def _monotonic_ms() -> Callable[[], int]:
    import time

    start = time.monotonic()
    return lambda: int((time.monotonic() - start) * 1000)


def _outcome_of(status: SessionStatus) -> str:
    if status is SessionStatus.ENVIRONMENT_COMPLETE:
        return OUTCOME_WIN
    if status is SessionStatus.GAME_OVER:
        return OUTCOME_LOSS
    return OUTCOME_INCOMPLETE


def record_actions(
    game_id: str,
    seed: int,
    actions: list[Action],
    *,
    source: str = "authored",
    participant: str = "-",
    ms_per_action: int = 1000,
) -> Recording:
    """Execute a scripted action sequence and return its trace."""
    counter = iter(range(ms_per_action, ms_per_action * (len(actions) + 1), ms_per_action))
    recorder = Recorder(
        Session.open(game_id, seed), source, participant, clock_ms=lambda: next(counter)
    )
    for action in actions:
        recorder.step(action)
    return recorder.finalize()


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReplayResult:
    identical: bool
    mismatch_index: Optional[int] = None  # action index, or len(actions) for outcome
    detail: str = ""


def replay(recording: Recording) -> ReplayResult:
    """Re-execute a trace; Identical iff every digest and the outcome match."""
    session = Session.open(recording.game_id, recording.seed)
    for i, entry in enumerate(recording.actions):
        if session.current_level != entry.pre_level:
            return ReplayResult(False, i, f"level {session.current_level} != {entry.pre_level}")
        try:
            transition = session.step(entry.action)
        except Exception as exc:
            return ReplayResult(False, i, f"step failed: {exc}")
        if transition.state_hash != entry.post_digest:
            return ReplayResult(
                False,
                i,
                f"digest {digest_hex(transition.state_hash)} != {digest_hex(entry.post_digest)}",
            )
    final = _outcome_of(session.status)
    if final != recording.outcome:
        return ReplayResult(
            False, len(recording.actions), f"outcome {final} != {recording.outcome}"
        )
    return ReplayResult(True)


def frames_at(recording: Recording, index: int) -> FrameSeq:
    """Frames visible after the index-th action; index 0 is the reset frame."""
    if not 0 <= index <= len(recording.actions):
        raise IndexOutOfRange(f"index {index} outside [0, {len(recording.actions)}]")
    session = Session.open(recording.game_id, recording.seed)
    if index == 0:
        return session.frames()
    transition = None
    for entry in recording.actions[:index]:
        transition = session.step(entry.action)
    assert transition is not None
    return transition.frames


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def write_recording(recording: Recording, out: TextIO) -> None:
    out.write("gridrec 1\n")
    out.write(f"game {recording.game_id}\n")
    out.write(f"seed {recording.seed}\n")
    out.write(f"source {recording.source}\n")
    out.write(f"participant {recording.participant}\n")
    for entry in recording.actions:
        out.write(
            f"action {format_action(entry.action)} {entry.pre_level} "
            f"{digest_hex(entry.post_digest)} {entry.t_ms}\n"
        )
    out.write(f"outcome {recording.outcome}\n")


def dumps_recording(recording: Recording) -> str:
    buf = io.StringIO()
    write_recording(recording, buf)
    return buf.getvalue()


def read_recording(inp: TextIO) -> Recording:
    def fields(expect: str, n: int) -> list[str]:
        line = inp.readline()
        parts = line.split()
        if len(parts) != n or parts[0] != expect:
            raise RecordingFormatError(f"expected {expect!r} record, got {line!r}")
        return parts

    version = fields("gridrec", 2)
    if version[1] != "1":
        raise RecordingFormatError(f"unsupported version {version[1]}")
    game_id = fields("game", 2)[1]
    seed = int(fields("seed", 2)[1])
    source = fields("source", 2)[1]
    participant = fields("participant", 2)[1]
    recording = Recording(game_id, seed, source, participant)
    for line in inp:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "action":
            if len(parts) != 5:
                raise RecordingFormatError(f"bad action record: {line!r}")
            recording.actions.append(
                RecordedAction(
                    parse_action(parts[1]), int(parts[2]), parse_digest(parts[3]), int(parts[4])
                )
            )
        elif parts[0] == "outcome":
            recording.outcome = parts[1]
            if recording.outcome not in (OUTCOME_WIN, OUTCOME_LOSS, OUTCOME_INCOMPLETE):
                raise RecordingFormatError(f"unknown outcome {parts[1]!r}")
        else:
            raise RecordingFormatError(f"unrecognized record {parts[0]!r}")
    return recording


def loads_recording(text: str) -> Recording:
    return read_recording(io.StringIO(text))


def recording_fingerprint(recording: Recording) -> str:
    """Stable content hash of the canonical serialization."""
    return digest_hex(content_digest(dumps_recording(recording).encode()))
