"""Environment authoring interface.

An environment is a pure, immutable object: all dynamics live in
``step``, a deterministic function of (level, hidden state, action).
Hidden states are small immutable values (tuples of ints) so they can
be hashed, cached, and explored. An environment that wants randomness
must fold its generator state into the hidden state; the built-in
environments are fully deterministic.

Undo and Reset never reach ``step``: the session implements both from
history and reset states. ``step`` only ever sees the kinds declared in
the spec's action set (minus UNDO).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from ..engine import Action, EnvironmentSpec, FrameSeq, GRID_SIZE


@dataclass(frozen=True)
class LevelDefinition:
    """Authoring metadata for one level."""

    index: int
    mechanics_tags: tuple[str, ...]
    tutorial: bool = False


class GridEnvironment(ABC):
    """Base class for turn-based 64x64 grid environments."""

    #: bump when the hidden-state byte encoding changes; invalidates digests.
    state_format_version: int = 1

    spec: EnvironmentSpec

    @abstractmethod
    def level_definitions(self) -> list[LevelDefinition]:
        ...

    @abstractmethod
    def reset_state(self, level: int):
        """Initial hidden state of a level. Never a win or game-over state."""

    @abstractmethod
    def step(self, level: int, state, action: Action) -> tuple[object, Optional[Callable[[], FrameSeq]]]:
        """Apply one action; returns (next_state, animation_builder).

        Must be pure and total for all declared non-UNDO kinds: an
        action with no effect returns the same state. The animation
        builder, when not None, lazily produces the intermediate frames
        only; the caller appends the settled frame of the next state.
        Laziness matters: bulk exploration never materializes frames.
        """

    @abstractmethod
    def render(self, level: int, state) -> np.ndarray:
        """Fresh (64, 64) uint8 frame with values in [0, 15]."""

    @abstractmethod
    def encode_state(self, state) -> bytes:
        """Canonical byte serialization of a hidden state."""

    @abstractmethod
    def is_win(self, level: int, state) -> bool:
        ...

    @abstractmethod
    def is_game_over(self, level: int, state) -> bool:
        ...

    def enumerate_actions(self, level: int, state) -> Iterable[Action]:
        """Complete set of possibly-effective actions in ``state``.

        Used by the state-graph builder. Every declared non-UNDO,
        non-SELECT kind must appear. SELECT actions may be restricted to
        the cells that can have an effect; any omitted cell must be a
        guaranteed self-transition (the builder spot-checks this).
        """
        from ..engine import ActionKind, kind_action

        for kind in sorted(self.spec.action_set, key=lambda k: k.value):
            if kind in (ActionKind.UNDO, ActionKind.SELECT):
                continue
            yield kind_action(kind)

    def select_probe_cells(self, level: int, state) -> list[tuple[int, int]]:
        """Cells whose SELECT may be effective; [] when SELECT is undeclared."""
        return []


def blank_frame(color: int = 0) -> np.ndarray:
    frame = np.empty((GRID_SIZE, GRID_SIZE), dtype=np.uint8)
    frame.fill(color)
    return frame


def draw_block(frame: np.ndarray, x: int, y: int, size: int, color: int) -> None:
    """Fill a square block whose top-left pixel is (x, y). x is the column."""
    frame[y : y + size, x : x + size] = color


def draw_border(frame: np.ndarray, color: int, width: int = 1) -> None:
    frame[:width, :] = color
    frame[-width:, :] = color
    frame[:, :width] = color
    frame[:, -width:] = color
