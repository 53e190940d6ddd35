"""``tiny``: a two-level corridor environment kept deliberately minuscule.

It exists as the exhaustive-enumeration subject for graph and
win-probability tests (well under 200 reachable states per level), so
it intentionally ignores the authoring constraints that benchmark
environments follow (six levels, random-play hardness). It is flagged
non-benchmark in its spec.

Level 1: an eight-cell corridor with a pit on the left end, a goal on
the right, and a cosmetic lamp that KEY3 toggles on even cells. The
position performs a lazy symmetric random walk under uniform random
play, so the exact win probability from the start cell has a closed
form the solver tests can be checked against.

Level 2: the goal is gated by an invisible latch, toggled by KEY3 on
cells 1-4 only. The latch is hidden state that never appears in the
frame: two states can render identically while remaining distinct.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..engine import Action, ActionKind, EnvironmentSpec, FrameSeq
from .base import GridEnvironment, LevelDefinition, blank_frame, draw_block

_CELLS = 8
_PIT = 0
_GOAL = _CELLS - 1
_STARTS = {1: 2, 2: 3}

_CELL_PX = 6
_X0 = 8
_Y0 = 28

_FLOOR = 1
_PIT_COLOR = 2
_GOAL_COLOR = 3
_PLAYER = 4
_LAMP_OFF = 5
_LAMP_ON = 6
_GATE = 9

State = tuple[int, int]  # (position, bit) bit = lamp (level 1) / latch (level 2)


class TinyCorridor(GridEnvironment):
    state_format_version = 1

    def __init__(self) -> None:
        self.spec = EnvironmentSpec(
            game_id="tiny",
            level_count=2,
            action_set=frozenset({ActionKind.KEY1, ActionKind.KEY2, ActionKind.KEY3}),
            benchmark=False,
        )

    def level_definitions(self) -> list[LevelDefinition]:
        return [
            LevelDefinition(1, ("walk", "pit", "lamp"), tutorial=True),
            LevelDefinition(2, ("walk", "pit", "hidden-latch")),
        ]

    def reset_state(self, level: int) -> State:
        return (_STARTS[level], 0)

    def step(self, level: int, state: State, action: Action) -> tuple[State, Optional[FrameSeq]]:
        pos, bit = state
        kind = action.kind
        if kind is ActionKind.KEY1:
            return (pos - 1, bit), None
        if kind is ActionKind.KEY2:
            if level == 2 and pos == _GOAL - 1 and bit == 0:
                return state, None  # gate shut
            return (pos + 1, bit), None
        if kind is ActionKind.KEY3:
            if level == 1 and pos % 2 == 0:
                return (pos, bit ^ 1), None
            if level == 2 and pos <= 4:
                return (pos, bit ^ 1), None
            return state, None
        return state, None

    def is_win(self, level: int, state: State) -> bool:
        return state[0] == _GOAL

    def is_game_over(self, level: int, state: State) -> bool:
        return state[0] == _PIT

    def encode_state(self, state: State) -> bytes:
        return bytes(state)

    def render(self, level: int, state: State) -> np.ndarray:
        pos, bit = state
        frame = blank_frame(0)
        for cell in range(_CELLS):
            color = _FLOOR
            if cell == _PIT:
                color = _PIT_COLOR
            elif cell == _GOAL:
                color = _GATE if level == 2 else _GOAL_COLOR
            draw_block(frame, _X0 + cell * _CELL_PX, _Y0, _CELL_PX, color)
        if level == 1:
            draw_block(frame, 28, 8, 8, _LAMP_ON if bit else _LAMP_OFF)
        draw_block(frame, _X0 + pos * _CELL_PX + 1, _Y0 + 1, _CELL_PX - 2, _PLAYER)
        return frame
