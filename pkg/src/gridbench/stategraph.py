"""Breadth-first state-space graph construction with hash-merged nodes.

Nodes are identified by state digest, so distinct trajectories arriving
at the same underlying state merge into one node. Edges are labeled by
actions; invalid actions appear as self-edges. Terminal nodes (level
win, environment win, game over) are marked and never expanded.

Undo is not a graph action: its successor depends on session history,
not on the current state, so edges are enumerated over the declared
action set minus Undo. The random-policy win probabilities computed
from these graphs use the same action set.

Select handling: environments enumerate the select cells that can have
an effect in a state (`select_probe_cells`); every other cell is a
guaranteed self-transition, recorded as one aggregated `select:*`
self-edge rather than ~4096 identical lines. The builder spot-checks
the guarantee on randomly probed cells. `stats.edge_count` counts
primitive (state, action) pairs, so it is comparable with exhaustive
enumeration; `stats.stored_edge_count` counts stored records.
"""

from __future__ import annotations

import random
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, TextIO

from .engine import (
    Action,
    ActionKind,
    GRID_SIZE,
    digest_of,
    format_action,
    get_environment,
    parse_action,
)
from .hashing import digest_hex, parse_digest

N_CELLS = GRID_SIZE * GRID_SIZE

TERMINAL_NONE = "-"
TERMINAL_LEVEL_WIN = "level_win"
TERMINAL_ENV_WIN = "env_win"
TERMINAL_GAME_OVER = "game_over"

WIN_TERMINALS = (TERMINAL_LEVEL_WIN, TERMINAL_ENV_WIN)


class BudgetsAllUnbounded(Exception):
    pass


class LevelOutOfRange(Exception):
    pass


class ContractViolation(Exception):
    """An environment broke a guarantee the builder relies on."""


@dataclass(frozen=True)
class Budgets:
    """Exploration limits; at least one must be finite."""

    max_steps: Optional[int] = None
    max_seconds: Optional[float] = None
    max_nodes: Optional[int] = None
    max_edges: Optional[int] = None

    def __post_init__(self) -> None:
        if all(
            v is None
            for v in (self.max_steps, self.max_seconds, self.max_nodes, self.max_edges)
        ):
            raise BudgetsAllUnbounded("at least one budget must be finite")


@dataclass
class Node:
    state: object
    depth: int
    terminal: str = TERMINAL_NONE
    expanded: bool = False


@dataclass
class GraphStats:
    node_count: int = 0
    edge_count: int = 0  # primitive (state, action) pairs, select cells expanded
    stored_edge_count: int = 0
    merge_density: float = 0.0
    max_depth: int = 0
    self_loop_count: int = 0
    cycle_detected: bool = False
    fully_explored: bool = False
    steps_used: int = 0
    seconds_used: float = 0.0


@dataclass
class StateGraph:
    game_id: str
    level: int
    root: int
    nodes: dict[int, Node] = field(default_factory=dict)
    edges: dict[int, list[tuple[Action, int]]] = field(default_factory=dict)
    select_rest: dict[int, int] = field(default_factory=dict)  # implicit self-cell count
    random_kind_count: int = 0  # kinds the random policy draws from (Undo excluded)
    stats: GraphStats = field(default_factory=GraphStats)

    def terminal_digests(self, marks: tuple[str, ...]) -> set[int]:
        return {d for d, n in self.nodes.items() if n.terminal in marks}

    def frontier_digests(self) -> set[int]:
        """Reached but not (fully) expanded non-terminal nodes."""
        return {
            d
            for d, n in self.nodes.items()
            if n.terminal == TERMINAL_NONE and not n.expanded
        }


def _terminal_mark(env, level: int, state) -> str:
    if env.is_win(level, state):
        return TERMINAL_ENV_WIN if level == env.spec.level_count else TERMINAL_LEVEL_WIN
    if env.is_game_over(level, state):
        return TERMINAL_GAME_OVER
    return TERMINAL_NONE


def build_state_graph(
    game_id: str,
    level: int,
    budgets: Budgets,
    *,
    select_spot_checks: int = 8,
    rng_seed: int = 0,
) -> StateGraph:
    """Explore a level breadth-first from its reset state under budgets."""
    env = get_environment(game_id)
    if not 1 <= level <= env.spec.level_count:
        raise LevelOutOfRange(f"level {level} outside [1, {env.spec.level_count}]")

    action_set = env.spec.action_set
    has_select = ActionKind.SELECT in action_set
    random_kinds = sorted(
        (k for k in action_set if k is not ActionKind.UNDO), key=lambda k: k.value
    )
    per_node_primitives = len(random_kinds) - 1 + N_CELLS if has_select else len(random_kinds)

    rng = random.Random(rng_seed)
    started = time.perf_counter()
    steps = 0

    root_state = env.reset_state(level)
    root = digest_of(env, level, root_state)
    graph = StateGraph(
        game_id=game_id, level=level, root=root, random_kind_count=len(random_kinds)
    )
    graph.nodes[root] = Node(root_state, 0, _terminal_mark(env, level, root_state))

    queue: deque[int] = deque()
    if graph.nodes[root].terminal == TERMINAL_NONE:
        queue.append(root)

    arrivals = 0
    revisits = 0
    budget_hit = False

    def over_budget() -> bool:
        if budgets.max_steps is not None and steps >= budgets.max_steps:
            return True
        if budgets.max_edges is not None and graph.stats.stored_edge_count >= budgets.max_edges:
            return True
        if budgets.max_seconds is not None:
            return time.perf_counter() - started >= budgets.max_seconds
        return False

    while queue:
        if over_budget():
            budget_hit = True
            break
        digest = queue.popleft()
        node = graph.nodes[digest]
        state = node.state
        out: list[tuple[Action, int]] = []
        room = True

        candidates = list(env.enumerate_actions(level, state))
        probed_cells: set[tuple[int, int]] = set()
        if has_select:
            probed_cells = {
                (a.x, a.y) for a in candidates if a.kind is ActionKind.SELECT
            }
            for _ in range(select_spot_checks):
                cell = (rng.randrange(GRID_SIZE), rng.randrange(GRID_SIZE))
                if cell in probed_cells:
                    continue
                nxt, _ = env.step(level, state, Action(ActionKind.SELECT, *cell))
                steps += 1
                if digest_of(env, level, nxt) != digest:
                    raise ContractViolation(
                        f"{game_id} level {level}: unenumerated select {cell} changed state"
                    )

        for action in candidates:
            nxt, _ = env.step(level, state, action)
            steps += 1
            nxt_digest = digest_of(env, level, nxt)
            arrivals += 1
            known = nxt_digest in graph.nodes
            if known:
                revisits += 1
            else:
                if budgets.max_nodes is not None and len(graph.nodes) >= budgets.max_nodes:
                    room = False
                    continue
                mark = _terminal_mark(env, level, nxt)
                graph.nodes[nxt_digest] = Node(nxt, node.depth + 1, mark)
                if mark == TERMINAL_NONE:
                    queue.append(nxt_digest)
            out.append((action, nxt_digest))
            if nxt_digest == digest:
                graph.stats.self_loop_count += 1

        graph.edges[digest] = out
        if has_select:
            graph.select_rest[digest] = N_CELLS - len(probed_cells)
        graph.stats.stored_edge_count += len(out)
        graph.stats.edge_count += per_node_primitives if room else len(out)
        node.expanded = room

    if queue:
        budget_hit = True

    graph.stats.node_count = len(graph.nodes)
    graph.stats.max_depth = max((n.depth for n in graph.nodes.values()), default=0)
    graph.stats.merge_density = revisits / arrivals if arrivals else 0.0
    graph.stats.fully_explored = not budget_hit and all(
        n.expanded or n.terminal != TERMINAL_NONE for n in graph.nodes.values()
    )
    graph.stats.cycle_detected = _has_nontrivial_cycle(graph)
    graph.stats.steps_used = steps
    graph.stats.seconds_used = time.perf_counter() - started
    return graph


def shortest_win_path(graph: StateGraph) -> Optional[list[Action]]:
    """Fewest-action route from the root to a win terminal, if one exists.

    Breadth-first over stored edges, so the result is an empirical
    lower bound on the actions needed to finish the level; authored
    reference playthroughs are generated from it.
    """
    if graph.nodes[graph.root].terminal in WIN_TERMINALS:
        return []
    parent: dict[int, tuple[int, Action]] = {}
    seen = {graph.root}
    queue: deque[int] = deque([graph.root])
    goal = None
    while queue and goal is None:
        cur = queue.popleft()
        for action, dst in graph.edges.get(cur, []):
            if dst in seen:
                continue
            seen.add(dst)
            parent[dst] = (cur, action)
            if graph.nodes[dst].terminal in WIN_TERMINALS:
                goal = dst
                break
            if graph.nodes[dst].terminal == TERMINAL_NONE:
                queue.append(dst)
    if goal is None:
        return None
    path: list[Action] = []
    node = goal
    while node != graph.root:
        node, action = parent[node]
        path.append(action)
    path.reverse()
    return path


def _has_nontrivial_cycle(graph: StateGraph) -> bool:
    """Directed cycle of length >= 2 among stored edges.

    Self-loops are ubiquitous (every invalid action is one) and are
    reported separately in stats.self_loop_count.
    """
    WHITE, GREY, BLACK = 0, 1, 2
    color: dict[int, int] = {}
    for start in graph.edges:
        if color.get(start, WHITE) != WHITE:
            continue
        stack: list[tuple[int, int]] = [(start, 0)]
        color[start] = GREY
        while stack:
            node, i = stack[-1]
            out = graph.edges.get(node, [])
            if i < len(out):
                stack[-1] = (node, i + 1)
                nxt = out[i][1]
                if nxt == node:
                    continue
                c = color.get(nxt, WHITE)
                if c == GREY:
                    return True
                if c == WHITE:
                    color[nxt] = GREY
                    stack.append((nxt, 0))
            else:
                color[node] = BLACK
                stack.pop()
    return False


# ---------------------------------------------------------------------------
# Graph file format
# ---------------------------------------------------------------------------
#
# Line-oriented text. Header, then one record per line:
#   gridgraph 1
#   game <id>
#   level <n>
#   root <digest>
#   kinds <random kind count>
#   node <digest> <depth> <terminal>
#   edge <src> <action-token> <dst>
#
# The special token `select:*` on a self-edge stands for every select
# cell not explicitly listed from that node.


def write_graph(graph: StateGraph, out: TextIO) -> None:
    out.write("gridgraph 1\n")
    out.write(f"game {graph.game_id}\n")
    out.write(f"level {graph.level}\n")
    out.write(f"root {digest_hex(graph.root)}\n")
    out.write(f"kinds {graph.random_kind_count}\n")
    for digest, node in graph.nodes.items():
        out.write(f"node {digest_hex(digest)} {node.depth} {node.terminal}\n")
    for src, out_edges in graph.edges.items():
        for action, dst in out_edges:
            out.write(f"edge {digest_hex(src)} {format_action(action)} {digest_hex(dst)}\n")
        if graph.select_rest.get(src, 0):
            out.write(f"edge {digest_hex(src)} select:* {digest_hex(src)}\n")


def read_graph(inp: TextIO) -> StateGraph:
    """Parse a graph file. Node states are not recoverable from disk."""
    header = inp.readline().split()
    if header[:1] != ["gridgraph"]:
        raise ValueError("not a gridgraph file")
    game_id = inp.readline().split()[1]
    level = int(inp.readline().split()[1])
    root = parse_digest(inp.readline().split()[1])
    kinds = int(inp.readline().split()[1])
    graph = StateGraph(game_id=game_id, level=level, root=root, random_kind_count=kinds)
    for line in inp:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "node":
            digest = parse_digest(parts[1])
            graph.nodes[digest] = Node(None, int(parts[2]), parts[3], expanded=True)
        elif parts[0] == "edge":
            src = parse_digest(parts[1])
            dst = parse_digest(parts[3])
            if parts[2] == "select:*":
                graph.select_rest[src] = -1  # recomputed below
            else:
                graph.edges.setdefault(src, []).append((parse_action(parts[2]), dst))
        else:
            raise ValueError(f"unrecognized record: {parts[0]!r}")
    for src, flagged in list(graph.select_rest.items()):
        explicit = sum(
            1 for a, _ in graph.edges.get(src, []) if a.kind is ActionKind.SELECT
        )
        graph.select_rest[src] = N_CELLS - explicit
    graph.stats.node_count = len(graph.nodes)
    graph.stats.stored_edge_count = sum(len(v) for v in graph.edges.values())
    return graph
