"""Exhaustive enumeration oracle for small environments.

This is the independent reference the state-graph builder and the
win-probability solver are checked against. It deliberately shares no
code with them: states are keyed by their raw hidden value (not by
digest), every primitive action is enumerated (all 4096 select cells,
no probe shortcuts), and the absorbing-chain solve is a dense
``scipy.linalg.solve`` over the full transition matrix.

Only practical for state spaces up to ~10,000 states; larger
environments raise StateSpaceTooLarge.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..engine import Action, ActionKind, GRID_SIZE, get_environment, kind_action


class StateSpaceTooLarge(Exception):
    pass


@dataclass
class OracleResult:
    """Exact enumeration of one level's reachable state space."""

    game_id: str
    level: int
    node_count: int
    edge_count: int  # primitive (state, action) pairs from non-terminal states
    terminal_by_state: dict  # state -> "win" | "lose"
    win_reachable: dict  # state -> bool, can a win terminal be reached
    win_probability: float  # uniform-random policy, from the reset state
    states: list


def _primitive_actions(action_set) -> list[Action]:
    """Every primitive action of the random policy, select cells expanded."""
    actions: list[Action] = []
    for kind in sorted(action_set, key=lambda k: k.value):
        if kind is ActionKind.UNDO or kind is ActionKind.SELECT:
            continue
        actions.append(kind_action(kind))
    if ActionKind.SELECT in action_set:
        for y in range(GRID_SIZE):
            for x in range(GRID_SIZE):
                actions.append(Action(ActionKind.SELECT, x, y))
    return actions


def oracle_enumerate(game_id: str, level: int, max_states: int = 10_000) -> OracleResult:
    """Exhaustively enumerate a level and solve its exact win probability.

    The random policy is uniform over the declared action kinds (Undo
    excluded; it reverts history rather than transitioning state), with
    a select kind spreading its share uniformly over all 4096 cells.
    Invalid actions self-transition and stay in the average.
    """
    env = get_environment(game_id)
    actions = _primitive_actions(env.spec.action_set)
    kinds = sorted(
        {a.kind for a in actions}, key=lambda k: k.value
    )
    kind_weight = 1.0 / len(kinds)
    n_cells = GRID_SIZE * GRID_SIZE

    def action_probability(action: Action) -> float:
        if action.kind is ActionKind.SELECT:
            return kind_weight / n_cells
        return kind_weight

    root = env.reset_state(level)
    index: dict = {root: 0}
    states = [root]
    succ: list[list[tuple[int, float]]] = []
    terminal_by_state: dict = {}
    edge_count = 0

    queue = deque([root])
    while queue:
        state = queue.popleft()
        if env.is_win(level, state):
            terminal_by_state[state] = "win"
            succ.append([])
            continue
        if env.is_game_over(level, state):
            terminal_by_state[state] = "lose"
            succ.append([])
            continue
        row: list[tuple[int, float]] = []
        for action in actions:
            nxt, _ = env.step(level, state, action)
            j = index.get(nxt)
            if j is None:
                if len(states) >= max_states:
                    raise StateSpaceTooLarge(
                        f"{game_id} level {level} exceeds {max_states} states"
                    )
                j = len(states)
                index[nxt] = j
                states.append(nxt)
                queue.append(nxt)
            row.append((j, action_probability(action)))
            edge_count += 1
        succ.append(row)

    # succ rows were appended in BFS dequeue order == state index order.
    n = len(states)
    win_idx = {index[s] for s, t in terminal_by_state.items() if t == "win"}
    lose_idx = {index[s] for s, t in terminal_by_state.items() if t == "lose"}

    # Backward reachability of a win terminal over the enumerated edges.
    preds: list[list[int]] = [[] for _ in range(n)]
    for i, row in enumerate(succ):
        for j, _ in row:
            preds[j].append(i)
    can_win = [False] * n
    stack = list(win_idx)
    for i in stack:
        can_win[i] = True
    while stack:
        j = stack.pop()
        for i in preds[j]:
            if not can_win[i]:
                can_win[i] = True
                stack.append(i)

    # Dense absorbing-chain solve restricted to transient states that can
    # reach a win; everything else has win probability exactly zero.
    solve_idx = [
        i for i in range(n) if can_win[i] and i not in win_idx and i not in lose_idx
    ]
    pos = {i: k for k, i in enumerate(solve_idx)}
    m = len(solve_idx)
    p = np.zeros(n)
    for i in win_idx:
        p[i] = 1.0
    if m:
        A = np.zeros((m, m))
        b = np.zeros(m)
        for i in solve_idx:
            k = pos[i]
            for j, w in succ[i]:
                if j in win_idx:
                    b[k] += w
                elif j in pos:
                    A[k, pos[j]] += w
        solution = scipy.linalg.solve(np.eye(m) - A, b)
        for i in solve_idx:
            p[i] = float(solution[pos[i]])

    return OracleResult(
        game_id=game_id,
        level=level,
        node_count=n,
        edge_count=edge_count,
        terminal_by_state=dict(terminal_by_state),
        win_reachable={states[i]: can_win[i] for i in range(n)},
        win_probability=float(p[0]),
        states=states,
    )
