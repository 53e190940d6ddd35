"""Deliberately broken environments used by validation tests.

``degn`` fails qualification honestly: its second level is a nine-stage
left/right gauntlet a random policy survives with probability 1/512,
two orders of magnitude above the 1-in-10,000 acceptance threshold. Its
stage counter is hidden state that never appears in the frame, so
consecutive stages render identically while remaining distinct states.

``crsh`` raises on select(0, 0), exercising crash capture and the
reproducing action trace in fuzz reports.

Neither is registered by default; call the register_* helpers.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..engine import (
    Action,
    ActionKind,
    EnvironmentSpec,
    FrameSeq,
    register_environment,
)
from .base import GridEnvironment, LevelDefinition, blank_frame, draw_block

# Correct key per stage of the degn gauntlet (0 = KEY1, 1 = KEY2).
GAUNTLET = (0, 1, 1, 0, 1, 0, 0, 1, 0)

_DEAD = -1
_WON = 99


class DegenerateGauntlet(GridEnvironment):
    """Two levels; level 2's random-policy win probability is 2**-9."""

    state_format_version = 1

    def __init__(self) -> None:
        self.spec = EnvironmentSpec(
            game_id="degn",
            level_count=2,
            action_set=frozenset({ActionKind.KEY1, ActionKind.KEY2}),
            benchmark=False,
        )

    def level_definitions(self) -> list[LevelDefinition]:
        return [
            LevelDefinition(1, ("walk",), tutorial=True),
            LevelDefinition(2, ("gauntlet", "hidden-stage")),
        ]

    def reset_state(self, level: int):
        return (0,)

    def step(self, level: int, state, action: Action) -> tuple[object, Optional[FrameSeq]]:
        (stage,) = state
        if stage in (_DEAD, _WON):
            return state, None
        if level == 1:
            # Three-cell walk: KEY2 advances, KEY1 retreats (floor at 0).
            if action.kind is ActionKind.KEY2:
                nxt = stage + 1
                return ((_WON,) if nxt >= 2 else (nxt,)), None
            return (max(stage - 1, 0),), None
        correct = GAUNTLET[stage]
        pressed = 0 if action.kind is ActionKind.KEY1 else 1
        if pressed != correct:
            return (_DEAD,), None
        if stage + 1 == len(GAUNTLET):
            return (_WON,), None
        return (stage + 1,), None

    def is_win(self, level: int, state) -> bool:
        return state[0] == _WON

    def is_game_over(self, level: int, state) -> bool:
        return state[0] == _DEAD

    def encode_state(self, state) -> bytes:
        return state[0].to_bytes(2, "little", signed=True)

    def render(self, level: int, state) -> np.ndarray:
        (stage,) = state
        frame = blank_frame(0)
        if level == 1:
            for cell in range(3):
                draw_block(frame, 20 + cell * 8, 28, 8, 1)
            pos = 2 if stage == _WON else max(stage, 0)
            draw_block(frame, 20 + pos * 8 + 1, 29, 6, 4)
            return frame
        # Level 2 renders the same scene at every stage: two doors and
        # the player between them. Progress is intentionally invisible.
        draw_block(frame, 12, 24, 12, 5)
        draw_block(frame, 40, 24, 12, 5)
        color = 4
        if stage == _DEAD:
            color = 2
        elif stage == _WON:
            color = 3
        draw_block(frame, 28, 26, 8, color)
        return frame


class CrashOnSelect(GridEnvironment):
    """Raises RuntimeError when select(0, 0) is submitted."""

    state_format_version = 1

    def __init__(self) -> None:
        self.spec = EnvironmentSpec(
            game_id="crsh",
            level_count=1,
            action_set=frozenset({ActionKind.KEY1, ActionKind.SELECT}),
            benchmark=False,
        )

    def level_definitions(self) -> list[LevelDefinition]:
        return [LevelDefinition(1, ("crash-fixture",), tutorial=True)]

    def reset_state(self, level: int):
        return (0,)

    def step(self, level: int, state, action: Action) -> tuple[object, Optional[FrameSeq]]:
        if action.kind is ActionKind.SELECT and action.x == 0 and action.y == 0:
            raise RuntimeError("fixture crash: select(0, 0)")
        if action.kind is ActionKind.KEY1:
            return ((state[0] + 1) % 4,), None
        return state, None

    def is_win(self, level: int, state) -> bool:
        return False

    def is_game_over(self, level: int, state) -> bool:
        return False

    def encode_state(self, state) -> bytes:
        return bytes([state[0]])

    def render(self, level: int, state) -> np.ndarray:
        frame = blank_frame(0)
        corners = ((8, 8), (48, 8), (48, 48), (8, 48))
        x, y = corners[state[0]]
        draw_block(frame, x, y, 8, 4)
        return frame


def register_fixture_environments() -> list[str]:
    for cls in (DegenerateGauntlet, CrashOnSelect):
        try:
            register_environment(cls())
        except ValueError:
            pass
    return ["degn", "crsh"]
