#!/usr/bin/env python3
"""Authoring report: per-level exploration, solvability, and random-play odds.

Run while designing or modifying environments. For every level it
prints the reachable state space, whether exploration completed inside
the budget, the exact random-policy win probability, and the shortest
solution. Non-tutorial levels of benchmark environments should stay
well below the 1-in-10,000 qualification threshold; the report flags
offenders.
"""

from __future__ import annotations

import argparse
import sys
import time

from gridbench.engine import ensure_builtins, format_action, get_environment
from gridbench.stategraph import Budgets, build_state_graph, shortest_win_path
from gridbench.winprob import estimate_win_probability

THRESHOLD = 1e-4


def report(game_id: str, max_nodes: int, max_seconds: float) -> int:
    env = get_environment(game_id)
    tutorial = env.spec.tutorial_level_index
    bad = 0
    for level in range(1, env.spec.level_count + 1):
        t0 = time.perf_counter()
        graph = build_state_graph(
            game_id, level, Budgets(max_nodes=max_nodes, max_seconds=max_seconds)
        )
        wp = estimate_win_probability(graph)
        path = shortest_win_path(graph)
        dt = time.perf_counter() - t0
        p = wp.exact if wp.exact is not None else wp.upper
        flag = ""
        if path is None:
            flag = "  !! UNSOLVABLE"
            bad += 1
        elif level != tutorial and env.spec.benchmark and p >= THRESHOLD:
            flag = "  !! P_win above threshold"
            bad += 1
        print(
            f"{game_id} L{level}: nodes={graph.stats.node_count:6d} "
            f"edges={graph.stats.stored_edge_count:7d} "
            f"full={graph.stats.fully_explored!s:5} "
            f"P_win={p:.3e} "
            f"optimal={len(path) if path is not None else '-'} "
            f"merge={graph.stats.merge_density:.2f} "
            f"[{dt:.1f}s]{flag}"
        )
        if path is not None and len(path) <= 40:
            print("    " + " ".join(format_action(a) for a in path))
    return bad


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("game_ids", nargs="*", default=None)
    parser.add_argument("--max-nodes", type=int, default=300_000)
    parser.add_argument("--max-seconds", type=float, default=120.0)
    args = parser.parse_args()
    ids = args.game_ids or ensure_builtins()
    bad = 0
    for game_id in ids:
        bad += report(game_id, args.max_nodes, args.max_seconds)
    return 1 if bad else 0


if __name__ == "__main__":
    ensure_builtins()
    sys.exit(main())
