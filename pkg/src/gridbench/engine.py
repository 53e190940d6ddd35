"""Turn-based engine core: frames, actions, sessions, level progression.

The engine is strictly turn-based: nothing changes between submitted
actions, and a fixed (game_id, seed, action sequence) triple reproduces
the exact same digest sequence on every run and platform. Sessions are
single-threaded; distinct sessions are independent.

Every submitted action counts exactly once against the current level,
whether or not it changed anything. Protocol errors (unsupported action
kind, acting on a finished session) raise and do not count.
"""

from __future__ import annotations

import enum
import importlib
import random
import re
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .hashing import state_digest

GRID_SIZE = 64
NUM_COLORS = 16

FrameSeq = tuple[np.ndarray, ...]


class GridBenchError(Exception):
    """Base for engine protocol errors."""


class UnknownGameId(GridBenchError):
    pass


class UnsupportedAction(GridBenchError):
    pass


class SessionTerminal(GridBenchError):
    pass


class LevelOutOfRange(GridBenchError):
    pass


class MalformedFrame(GridBenchError):
    pass


class ActionKind(enum.Enum):
    KEY1 = "key1"
    KEY2 = "key2"
    KEY3 = "key3"
    KEY4 = "key4"
    KEY5 = "key5"
    UNDO = "undo"
    RESET = "reset"
    SELECT = "select"


KEY_KINDS = (
    ActionKind.KEY1,
    ActionKind.KEY2,
    ActionKind.KEY3,
    ActionKind.KEY4,
    ActionKind.KEY5,
)


@dataclass(frozen=True, slots=True)
class Action:
    """One discrete interaction. ``x``/``y`` are present iff kind is SELECT."""

    kind: ActionKind
    x: Optional[int] = None
    y: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind is ActionKind.SELECT:
            if self.x is None or self.y is None:
                raise ValueError("select action requires coordinates")
            if not (0 <= self.x < GRID_SIZE and 0 <= self.y < GRID_SIZE):
                raise ValueError(f"select coordinates out of bounds: ({self.x}, {self.y})")
        elif self.x is not None or self.y is not None:
            raise ValueError(f"{self.kind.value} action takes no coordinates")


KEY1 = Action(ActionKind.KEY1)
KEY2 = Action(ActionKind.KEY2)
KEY3 = Action(ActionKind.KEY3)
KEY4 = Action(ActionKind.KEY4)
KEY5 = Action(ActionKind.KEY5)
UNDO = Action(ActionKind.UNDO)
RESET = Action(ActionKind.RESET)

_KIND_ACTIONS = {
    ActionKind.KEY1: KEY1,
    ActionKind.KEY2: KEY2,
    ActionKind.KEY3: KEY3,
    ActionKind.KEY4: KEY4,
    ActionKind.KEY5: KEY5,
    ActionKind.UNDO: UNDO,
    ActionKind.RESET: RESET,
}


def select(x: int, y: int) -> Action:
    return Action(ActionKind.SELECT, x, y)


def kind_action(kind: ActionKind) -> Action:
    """The singleton Action for a coordinate-free kind."""
    return _KIND_ACTIONS[kind]


_ACTION_TOKEN = re.compile(r"^(key[1-5]|undo|reset)$|^select:(\d{1,2}),(\d{1,2})$")


def format_action(action: Action) -> str:
    """Single-token text form shared by recording files, graph files, and logs."""
    if action.kind is ActionKind.SELECT:
        return f"select:{action.x},{action.y}"
    return action.kind.value


def parse_action(token: str) -> Action:
    m = _ACTION_TOKEN.match(token)
    if not m:
        raise ValueError(f"unrecognized action token: {token!r}")
    if m.group(1):
        return kind_action(ActionKind(m.group(1)))
    return select(int(m.group(2)), int(m.group(3)))


def validate_frame(frame: np.ndarray) -> None:
    """Raise MalformedFrame unless ``frame`` is a 64x64 grid of colors 0-15."""
    if not isinstance(frame, np.ndarray):
        raise MalformedFrame(f"frame is not an ndarray: {type(frame)!r}")
    if frame.shape != (GRID_SIZE, GRID_SIZE):
        raise MalformedFrame(f"frame shape {frame.shape} != (64, 64)")
    if frame.dtype != np.uint8:
        raise MalformedFrame(f"frame dtype {frame.dtype} != uint8")
    if frame.size and int(frame.max()) >= NUM_COLORS:
        raise MalformedFrame(f"cell value {int(frame.max())} outside [0, 15]")


@dataclass(frozen=True)
class EnvironmentSpec:
    """Static description of one environment.

    ``benchmark`` is False for utility environments (oracle subjects,
    test fixtures) that are excluded from benchmark datasets.
    """

    game_id: str
    level_count: int
    action_set: frozenset[ActionKind]
    tutorial_level_index: int = 1
    benchmark: bool = True

    def __post_init__(self) -> None:
        if len(self.game_id) != 4:
            raise ValueError(f"game_id must be exactly 4 characters: {self.game_id!r}")
        if self.level_count < 1:
            raise ValueError("level_count must be >= 1")
        if not self.action_set:
            raise ValueError("action_set must be non-empty")
        if not self.action_set <= set(ActionKind):
            raise ValueError("action_set contains unknown kinds")


class SessionStatus(enum.Enum):
    IN_PROGRESS = "in_progress"
    LEVEL_COMPLETE = "level_complete"
    ENVIRONMENT_COMPLETE = "environment_complete"
    GAME_OVER = "game_over"


_ACTIVE = (SessionStatus.IN_PROGRESS, SessionStatus.LEVEL_COMPLETE)


class Transition:
    """Result of one submitted action.

    ``frames`` is materialized lazily: hot loops (random regimes, graph
    construction) read only digests and flags, and rendering every
    animation frame eagerly would dominate their runtime. Hidden states
    are immutable, so deferred rendering is exact.
    """

    __slots__ = (
        "level_completed",
        "environment_completed",
        "game_over",
        "action_was_valid",
        "state_hash",
        "_thunk",
        "_frames",
    )

    def __init__(
        self,
        level_completed: bool,
        environment_completed: bool,
        game_over: bool,
        action_was_valid: bool,
        state_hash: int,
        frames_thunk: Callable[[], FrameSeq],
    ) -> None:
        self.level_completed = level_completed
        self.environment_completed = environment_completed
        self.game_over = game_over
        self.action_was_valid = action_was_valid
        self.state_hash = state_hash
        self._thunk = frames_thunk
        self._frames: Optional[FrameSeq] = None

    @property
    def frames(self) -> FrameSeq:
        if self._frames is None:
            self._frames = self._thunk()
        return self._frames


# ---------------------------------------------------------------------------
# Environment registry
# ---------------------------------------------------------------------------

_REGISTRY: dict[str, object] = {}
_REGISTRY_LOCK = threading.Lock()


def register_environment(env, *, replace: bool = False) -> None:
    """Add an environment instance to the global registry.

    The registry is write-once per game_id: it is populated at startup
    and read-only afterwards. ``replace`` exists for test fixtures.
    """
    gid = env.spec.game_id
    with _REGISTRY_LOCK:
        if gid in _REGISTRY and not replace and _REGISTRY[gid] is not env:
            raise ValueError(f"game_id {gid!r} already registered")
        _REGISTRY[gid] = env


def get_environment(game_id: str):
    try:
        return _REGISTRY[game_id]
    except KeyError:
        raise UnknownGameId(f"no environment registered under {game_id!r}") from None


def registered_game_ids() -> list[str]:
    return sorted(_REGISTRY)


def ensure_builtins() -> list[str]:
    """Register the built-in environments if they are not present yet."""
    envs = importlib.import_module("gridbench.envs")
    envs.register_builtin_environments()
    return registered_game_ids()


# ---------------------------------------------------------------------------
# Digest / frame caches
# ---------------------------------------------------------------------------


class _EnvCaches:
    """Per-environment memoization of digests and rendered frames.

    Hidden states are immutable and rendering is a pure function of
    (level, state), so both caches are sound. The digest cache is
    unbounded (8 bytes per distinct state); the frame cache is a small
    FIFO since frames are cheap to re-render.
    """

    __slots__ = ("digests", "frames", "frame_order", "frame_cap")

    def __init__(self, frame_cap: int = 4096) -> None:
        self.digests: dict[tuple[int, object], int] = {}
        self.frames: dict[tuple[int, object], np.ndarray] = {}
        self.frame_order: list[tuple[int, object]] = []
        self.frame_cap = frame_cap


def _caches_for(env) -> _EnvCaches:
    c = getattr(env, "__gridbench_caches__", None)
    if c is None:
        c = _EnvCaches()
        setattr(env, "__gridbench_caches__", c)
    return c


def rendered_frame(env, level: int, state) -> np.ndarray:
    """Cached, read-only rendering of a hidden state."""
    caches = _caches_for(env)
    key = (level, state)
    frame = caches.frames.get(key)
    if frame is None:
        frame = env.render(level, state)
        frame.setflags(write=False)
        if len(caches.frame_order) >= caches.frame_cap:
            evict = caches.frame_order[: caches.frame_cap // 2]
            del caches.frame_order[: caches.frame_cap // 2]
            for k in evict:
                caches.frames.pop(k, None)
        caches.frames[key] = frame
        caches.frame_order.append(key)
    return frame


def digest_of(env, level: int, state) -> int:
    """Digest of (level, hidden state, rendered frame); cached per state."""
    caches = _caches_for(env)
    key = (level, state)
    d = caches.digests.get(key)
    if d is None:
        frame = rendered_frame(env, level, state)
        d = state_digest(
            env.spec.game_id,
            env.state_format_version,
            level,
            env.encode_state(state),
            frame,
        )
        caches.digests[key] = d
    return d


# ---------------------------------------------------------------------------
# Session
# ---------------------------------------------------------------------------


class Session:
    """A single play-through of one environment.

    Undo history holds prior hidden states within the current level;
    only state-changing actions are pushed, so one Undo always reverts
    exactly one observable change. History is cleared on reset and at
    level boundaries.
    """

    __slots__ = (
        "env",
        "spec",
        "seed",
        "rng",
        "current_level",
        "status",
        "action_counts",
        "first_level",
        "_state",
        "_digest",
        "_history",
    )

    def __init__(self, env, seed: int, start_level: int = 1) -> None:
        spec: EnvironmentSpec = env.spec
        if not 1 <= start_level <= spec.level_count:
            raise LevelOutOfRange(f"level {start_level} outside [1, {spec.level_count}]")
        self.env = env
        self.spec = spec
        self.seed = seed & 0xFFFFFFFFFFFFFFFF
        self.rng = random.Random(self.seed)
        self.current_level = start_level
        self.first_level = start_level
        self.status = SessionStatus.IN_PROGRESS
        self.action_counts: list[int] = [0]
        self._state = env.reset_state(start_level)
        self._digest = digest_of(env, start_level, self._state)
        self._history: list[object] = []

    # -- lifecycle -----------------------------------------------------

    @classmethod
    def open(cls, game_id: str, seed: int, start_level: int = 1) -> "Session":
        """Open a fresh session on a registered environment.

        ``start_level`` > 1 is a validation/authoring facility (graph
        builds and per-level fuzzing); benchmark runs always start at 1.
        """
        return cls(get_environment(game_id), seed, start_level)

    @property
    def state(self):
        return self._state

    def state_digest(self) -> int:
        return self._digest

    def frames(self) -> FrameSeq:
        """Frames for the state the next action applies to."""
        return (rendered_frame(self.env, self.current_level, self._state),)

    def level_action_count(self, level: int) -> int:
        idx = level - self.first_level
        if not 0 <= idx < len(self.action_counts):
            raise LevelOutOfRange(f"level {level} not entered")
        return self.action_counts[idx]

    def levels_entered(self) -> list[int]:
        return list(range(self.first_level, self.first_level + len(self.action_counts)))

    # -- stepping ------------------------------------------------------

    def step(self, action: Action) -> Transition:
        """Submit one action; returns the resulting transition.

        Raises SessionTerminal after environment completion or game
        over, and UnsupportedAction for kinds outside the declared
        action set (Reset is always accepted). Neither raise counts as
        an action.
        """
        if self.status not in _ACTIVE:
            raise SessionTerminal(f"session is {self.status.value}")
        kind = action.kind
        if kind is not ActionKind.RESET and kind not in self.spec.action_set:
            raise UnsupportedAction(f"{kind.value} not in {self.spec.game_id!r} action set")

        env = self.env
        level = self.current_level
        prev_state = self._state
        prev_digest = self._digest
        anim: Optional[Callable[[], FrameSeq]] = None

        if kind is ActionKind.RESET:
            next_state = env.reset_state(level)
            self._history.clear()
        elif kind is ActionKind.UNDO:
            next_state = self._history.pop() if self._history else prev_state
        else:
            next_state, anim = env.step(level, prev_state, action)

        self.action_counts[-1] += 1

        next_digest = digest_of(env, level, next_state)
        changed = next_digest != prev_digest
        if changed and kind not in (ActionKind.UNDO, ActionKind.RESET):
            self._history.append(prev_state)

        level_completed = bool(env.is_win(level, next_state))
        game_over = bool(not level_completed and env.is_game_over(level, next_state))
        environment_completed = level_completed and level == self.spec.level_count

        if environment_completed:
            self.status = SessionStatus.ENVIRONMENT_COMPLETE
            self._state = next_state
            self._digest = next_digest
            thunk = _frames_thunk(env, anim, (level, next_state))
        elif level_completed:
            self.status = SessionStatus.LEVEL_COMPLETE
            self.current_level = level + 1
            self.action_counts.append(0)
            self._history.clear()
            entry_state = env.reset_state(self.current_level)
            self._state = entry_state
            self._digest = digest_of(env, self.current_level, entry_state)
            thunk = _frames_thunk(
                env, anim, (level, next_state), (self.current_level, entry_state)
            )
        elif game_over:
            self.status = SessionStatus.GAME_OVER
            self._state = next_state
            self._digest = next_digest
            thunk = _frames_thunk(env, anim, (level, next_state))
        else:
            self.status = SessionStatus.IN_PROGRESS
            self._state = next_state
            self._digest = next_digest
            thunk = _frames_thunk(env, anim, (level, next_state))

        return Transition(
            level_completed=level_completed,
            environment_completed=environment_completed,
            game_over=game_over,
            action_was_valid=changed,
            state_hash=self._digest,
            frames_thunk=thunk,
        )

    def undo(self) -> Transition:
        return self.step(UNDO)

    def reset_level(self) -> Transition:
        return self.step(RESET)


def _frames_thunk(env, anim: Optional[Callable[[], FrameSeq]], *stills: tuple[int, object]):
    def build() -> FrameSeq:
        frames = list(anim()) if anim else []
        frames.extend(rendered_frame(env, lvl, st) for lvl, st in stills)
        return tuple(frames)

    return build


def open_session(game_id: str, seed: int) -> Session:
    """Open a fresh session at level 1 on a registered environment."""
    return Session.open(game_id, seed)
