"""``smp1``: push blocks onto marked cells across six levels.

Mechanics, introduced progressively and composed in later levels:

* blocks are pushed (never pulled); walls stop both player and blocks;
* open pits end the run if the player walks in, but a block pushed in
  fills the pit permanently, turning it into floor (some levels demand
  sacrificing a spare block this way);
* a retractable walkway spans a gap; clicking the wall panel toggles it.
  Retracting it under the player is fatal, and a block on it (or pushed
  into the open gap) is lost down the gap.

The first level is a bare room that teaches pushing. Every later level
is ringed with pits, so uninformed random play dies quickly; random
win probabilities are checked against the enumeration tooling and kept
far below the qualification threshold.

Keys: KEY1 up, KEY2 down, KEY3 left, KEY4 right. Select clicks a frame
cell; only panel cells respond.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from ..engine import Action, ActionKind, EnvironmentSpec
from .base import GridEnvironment, LevelDefinition, blank_frame

_CELL = 4

_FLOOR = "."
_WALL = "#"
_PLAYER = "P"
_BOX = "B"
_TARGET = "T"
_HOLE = "H"
_SWITCH = "S"
_BRIDGE = "~"

_LAYOUTS: dict[int, tuple[str, ...]] = {
    1: (
        "########",
        "#......#",
        "#.PB..T#",
        "#......#",
        "########",
    ),
    2: (
        "###############",
        "#HHHHHH..HHHHH#",
        "#P.B.....#HHHH#",
        "#HHHHHHH.HHHHH#",
        "#HHHHHH..HHHHH#",
        "#HHHHHH.....TH#",
        "###############",
    ),
    3: (
        "#############",
        "#HHHHHHHHHHH#",
        "#P.B.....THH#",
        "#H.HHHHHHHHH#",
        "#H.B......TH#",
        "#HHHHHHHHHHH#",
        "#############",
    ),
    4: (
        "#############",
        "#HHHHHHHHHHH#",
        "#P.B.H....TH#",
        "#HH...HHHHHH#",
        "#HH.HBHHHHHH#",
        "#HH...HHHHHH#",
        "#############",
    ),
    5: (
        "#############",
        "#HHHHHHHHHHH#",
        "#P.B..~~...T#",
        "#S.HHHHHHHHH#",
        "#############",
    ),
    6: (
        "##############",
        "#HHHHHHHHHHHH#",
        "#PB.H...~~.TH#",
        "#HHHH..HHHHHH#",
        "#HHHH.BHHHHHS#",
        "#HHHH..HHHHHH#",
        "##############",
    ),
}

_TAGS: dict[int, tuple[str, ...]] = {
    1: ("push",),
    2: ("push", "pits", "corner"),
    3: ("push", "pits", "two-blocks"),
    4: ("push", "pits", "fill-sacrifice"),
    5: ("push", "pits", "walkway-panel"),
    6: ("push", "pits", "fill-sacrifice", "walkway-panel"),
}


class _LevelMap:
    """Static geometry parsed from a layout drawing."""

    def __init__(self, index: int, rows: tuple[str, ...]) -> None:
        self.index = index
        self.height = len(rows)
        self.width = len(rows[0])
        if any(len(r) != self.width for r in rows):
            raise ValueError(f"ragged layout for level {index}")
        self.walls: set[int] = set()
        self.targets: tuple[int, ...] = ()
        self.holes: list[int] = []
        self.switches: list[int] = []
        self.bridges: list[int] = []
        self.player_start = -1
        boxes = []
        targets = []
        for y, row in enumerate(rows):
            for x, ch in enumerate(row):
                cell = y * self.width + x
                if ch == _WALL:
                    self.walls.add(cell)
                elif ch == _PLAYER:
                    self.player_start = cell
                elif ch == _BOX:
                    boxes.append(cell)
                elif ch == _TARGET:
                    targets.append(cell)
                elif ch == _HOLE:
                    self.holes.append(cell)
                elif ch == _SWITCH:
                    self.switches.append(cell)
                    self.walls.add(cell)  # panels are not walkable
                elif ch == _BRIDGE:
                    self.bridges.append(cell)
        self.targets = tuple(targets)
        self.start_boxes = tuple(sorted(boxes))
        self.hole_bit = {cell: 1 << i for i, cell in enumerate(self.holes)}
        if self.player_start < 0:
            raise ValueError(f"level {index} has no player start")
        # Frame placement: centered, 4px cells.
        self.x0 = (64 - self.width * _CELL) // 2
        self.y0 = (64 - self.height * _CELL) // 2
        self.moves = (-self.width, self.width, -1, 1)  # KEY1..KEY4

    def pixel_to_cell(self, px: int, py: int) -> Optional[int]:
        cx = (px - self.x0) // _CELL
        cy = (py - self.y0) // _CELL
        if 0 <= cx < self.width and 0 <= cy < self.height:
            return cy * self.width + cx
        return None

    def switch_pixels(self) -> list[tuple[int, int]]:
        out = []
        for cell in self.switches:
            cx, cy = cell % self.width, cell // self.width
            for dy in range(_CELL):
                for dx in range(_CELL):
                    out.append((self.x0 + cx * _CELL + dx, self.y0 + cy * _CELL + dy))
        return out


# State: (player_cell, boxes_sorted_tuple, open_holes_mask, walkway_extended)
State = tuple[int, tuple[int, ...], int, int]

_MOVE_KEYS = {
    ActionKind.KEY1: 0,
    ActionKind.KEY2: 1,
    ActionKind.KEY3: 2,
    ActionKind.KEY4: 3,
}


class BlockPusher(GridEnvironment):
    state_format_version = 1

    def __init__(self) -> None:
        self.spec = EnvironmentSpec(
            game_id="smp1",
            level_count=6,
            action_set=frozenset(
                {
                    ActionKind.KEY1,
                    ActionKind.KEY2,
                    ActionKind.KEY3,
                    ActionKind.KEY4,
                    ActionKind.UNDO,
                    ActionKind.SELECT,
                }
            ),
        )
        self.maps = {i: _LevelMap(i, rows) for i, rows in _LAYOUTS.items()}

    def level_definitions(self) -> list[LevelDefinition]:
        return [
            LevelDefinition(i, _TAGS[i], tutorial=(i == 1))
            for i in sorted(_LAYOUTS)
        ]

    def reset_state(self, level: int) -> State:
        m = self.maps[level]
        full_mask = (1 << len(m.holes)) - 1
        return (m.player_start, m.start_boxes, full_mask, 0)

    # -- dynamics --------------------------------------------------------

    def _deadly(self, m: _LevelMap, cell: int, holes_mask: int, walkway: int) -> bool:
        bit = m.hole_bit.get(cell)
        if bit is not None and holes_mask & bit:
            return True
        return cell in m.bridges and not walkway

    def step(self, level: int, state: State, action: Action):
        m = self.maps[level]
        player, boxes, holes_mask, walkway = state

        if action.kind is ActionKind.SELECT:
            cell = m.pixel_to_cell(action.x, action.y)
            if cell is None or cell not in m.switches:
                return state, None
            new_walkway = walkway ^ 1
            if not new_walkway and any(b in m.bridges for b in boxes):
                boxes = tuple(b for b in boxes if b not in m.bridges)
            return (player, boxes, holes_mask, new_walkway), None

        move = _MOVE_KEYS.get(action.kind)
        if move is None:
            return state, None
        delta = m.moves[move]
        dest = player + delta
        if dest in m.walls:
            return state, None
        if dest in boxes:
            beyond = dest + delta
            if beyond in m.walls or beyond in boxes:
                return state, None
            new_boxes = list(boxes)
            new_boxes.remove(dest)
            bit = m.hole_bit.get(beyond)
            if bit is not None and holes_mask & bit:
                holes_mask &= ~bit  # block fills the pit
            elif beyond in m.bridges and not walkway:
                pass  # block lost down the open gap
            else:
                new_boxes.append(beyond)
            return (dest, tuple(sorted(new_boxes)), holes_mask, walkway), None
        return (dest, boxes, holes_mask, walkway), None

    def is_win(self, level: int, state: State) -> bool:
        m = self.maps[level]
        _, boxes, _, _ = state
        return all(t in boxes for t in m.targets)

    def is_game_over(self, level: int, state: State) -> bool:
        m = self.maps[level]
        player, _, holes_mask, walkway = state
        return self._deadly(m, player, holes_mask, walkway)

    def encode_state(self, state: State) -> bytes:
        player, boxes, holes_mask, walkway = state
        mask_bytes = holes_mask.to_bytes((holes_mask.bit_length() + 7) // 8 or 1, "little")
        parts = [player.to_bytes(2, "little"), bytes([len(boxes)])]
        parts.extend(b.to_bytes(2, "little") for b in boxes)
        parts.append(bytes([len(mask_bytes)]))
        parts.append(mask_bytes)
        parts.append(bytes([walkway]))
        return b"".join(parts)

    def select_probe_cells(self, level: int, state: State) -> list[tuple[int, int]]:
        return self.maps[level].switch_pixels()

    def enumerate_actions(self, level: int, state: State):
        yield from super().enumerate_actions(level, state)
        for x, y in self.select_probe_cells(level, state):
            yield Action(ActionKind.SELECT, x, y)

    # -- rendering -------------------------------------------------------

    def render(self, level: int, state: State) -> np.ndarray:
        m = self.maps[level]
        player, boxes, holes_mask, walkway = state
        frame = blank_frame(0)

        def put(cell: int, color: int, inset: int = 0) -> None:
            cx, cy = cell % m.width, cell // m.width
            x = m.x0 + cx * _CELL + inset
            y = m.y0 + cy * _CELL + inset
            size = _CELL - 2 * inset
            frame[y : y + size, x : x + size] = color

        for cell in m.walls:
            put(cell, 5)
        for cell in m.switches:
            put(cell, 13)
            put(cell, 6 if walkway else 8, inset=1)
        for cell in m.holes:
            put(cell, 8 if holes_mask & m.hole_bit[cell] else 11)
        for cell in m.bridges:
            if walkway:
                put(cell, 6)
            else:
                put(cell, 8)
                put(cell, 6, inset=1)
        for cell in m.targets:
            if cell not in boxes:
                put(cell, 3, inset=1)
        for cell in boxes:
            put(cell, 10 if cell in m.targets else 9)
        dead = self._deadly(m, player, holes_mask, walkway)
        put(player, 2 if dead else 4)
        return frame
