#!/usr/bin/env python3
"""Regenerate the committed recordings and baseline files.

The optimal playthrough of each environment is the per-level shortest
win path from exhaustive graph exploration. Participant-style traces
are the optimal solution padded with verified no-op detours (state
digest returns to the level's reset digest before the solution plays),
giving controlled per-level action counts. Baselines are then extracted
from the participant traces exactly as they would be from live human
sessions, so the committed baseline and the extraction pipeline can
never drift apart.

Any change to environment mechanics changes digests and invalidates
these artifacts; rerun this script and commit the result.
"""

from __future__ import annotations

import sys
from pathlib import Path

from gridbench.engine import (
    Action,
    ActionKind,
    Session,
    digest_of,
    ensure_builtins,
    get_environment,
    kind_action,
)
from gridbench.envs.fixtures import GAUNTLET, register_fixture_environments
from gridbench.recording import (
    Recording,
    dumps_recording,
    record_actions,
    replay,
)
from gridbench.scoring import (
    ParticipantAttempt,
    dumps_baseline,
    extract_baseline,
    score_recording,
)
from gridbench.stategraph import Budgets, build_state_graph, shortest_win_path

DATA = Path(__file__).resolve().parent.parent / "src" / "gridbench" / "data"

# Per-level padding added to the optimal counts for the synthetic
# participant traces (p2's counts become the baseline h). smp2 pads are
# even because its no-op detours are two-action inverse pairs.
PADS = {
    "smp1": {"p01": (2, 4, 3, 5, 2, 4), "p02": (5, 8, 6, 9, 4, 7), "p03": (9, 14, 11, 13, 8, 12)},
    "smp2": {"p01": (2, 4, 2, 6, 4, 4), "p02": (6, 8, 6, 10, 8, 8), "p03": (10, 14, 12, 16, 12, 14)},
}

MS_PER_ACTION = {"optimal": 900, "p01": 1400, "p02": 1900, "p03": 2600}


def padding_unit(game_id: str, level: int) -> list[Action]:
    """A 1- or 2-action sequence that returns the reset state unchanged."""
    env = get_environment(game_id)
    reset = env.reset_state(level)
    reset_digest = digest_of(env, level, reset)
    candidates = [
        kind_action(k)
        for k in sorted(env.spec.action_set, key=lambda k: k.value)
        if k not in (ActionKind.UNDO, ActionKind.SELECT)
    ]
    if ActionKind.SELECT in env.spec.action_set:
        candidates.append(Action(ActionKind.SELECT, 0, 0))
    for a in candidates:
        s1, _ = env.step(level, reset, a)
        if digest_of(env, level, s1) == reset_digest:
            return [a]
    for a in candidates:
        s1, _ = env.step(level, reset, a)
        for b in candidates:
            s2, _ = env.step(level, s1, b)
            if digest_of(env, level, s2) == reset_digest:
                return [a, b]
    raise RuntimeError(f"{game_id} level {level}: no no-op padding found")


def optimal_paths(game_id: str) -> list[list[Action]]:
    env = get_environment(game_id)
    paths = []
    for level in range(1, env.spec.level_count + 1):
        graph = build_state_graph(game_id, level, Budgets(max_nodes=500_000, max_seconds=300))
        if not graph.stats.fully_explored:
            raise RuntimeError(f"{game_id} level {level} not fully explored")
        path = shortest_win_path(graph)
        if path is None:
            raise RuntimeError(f"{game_id} level {level} unsolvable")
        paths.append(path)
    return paths


def padded_run(game_id: str, paths: list[list[Action]], pads: tuple[int, ...]) -> list[Action]:
    actions: list[Action] = []
    for level, path in enumerate(paths, start=1):
        pad = pads[level - 1]
        unit = padding_unit(game_id, level)
        if pad % len(unit):
            raise ValueError(
                f"{game_id} level {level}: pad {pad} not a multiple of unit {len(unit)}"
            )
        actions.extend(unit * (pad // len(unit)))
        actions.extend(path)
    return actions


def check_identical(recording: Recording, name: str) -> None:
    result = replay(recording)
    if not result.identical:
        raise RuntimeError(f"{name}: replay mismatch at {result.mismatch_index}: {result.detail}")


def save(recording: Recording, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_recording(recording))


def build_benchmark_env(game_id: str) -> None:
    print(f"== {game_id}")
    paths = optimal_paths(game_id)
    rec_dir = DATA / "recordings" / game_id

    optimal = record_actions(
        game_id, 0, [a for p in paths for a in p],
        source="authored", participant="optimal", ms_per_action=MS_PER_ACTION["optimal"],
    )
    assert optimal.outcome == "win"
    check_identical(optimal, f"{game_id}/optimal")
    save(optimal, rec_dir / "optimal.rec")

    participants = {}
    for pid, pads in PADS[game_id].items():
        actions = padded_run(game_id, paths, pads)
        rec = record_actions(
            game_id, 0, actions,
            source="human", participant=pid, ms_per_action=MS_PER_ACTION[pid],
        )
        assert rec.outcome == "win", f"{game_id}/{pid} did not win"
        check_identical(rec, f"{game_id}/{pid}")
        save(rec, rec_dir / f"{pid}.rec")
        participants[pid] = rec
        print(f"   {pid}: {rec.total_actions()} actions, {rec.duration_ms()/60000:.1f} min")

    baseline = extract_baseline(
        [ParticipantAttempt.from_recording(r) for r in participants.values()],
        game_id,
        get_environment(game_id).spec.level_count,
        tuple(len(p) for p in paths),
    )
    base_path = DATA / "baselines" / f"{game_id}.baseline"
    base_path.parent.mkdir(parents=True, exist_ok=True)
    base_path.write_text(dumps_baseline(baseline))
    print(f"   baseline h={baseline.h}")

    # A run that solves every level in exactly h actions; scoring it
    # against its own baseline must give a perfect environment score.
    baseline_run = record_actions(
        game_id, 0, padded_run(game_id, paths, PADS[game_id]["p02"]),
        source="authored", participant="baseline-replay", ms_per_action=1500,
    )
    check_identical(baseline_run, f"{game_id}/baseline_replay")
    card = score_recording(baseline_run, baseline)
    if card.environment != 1.0:
        raise RuntimeError(f"{game_id}: baseline replay scores {card.environment}, not 1.0")
    save(baseline_run, rec_dir / "baseline_replay.rec")

    loss = record_actions(game_id, 0, LOSS_ACTIONS[game_id], source="authored", participant="loss")
    assert loss.outcome == "loss", f"{game_id} loss trace ended {loss.outcome}"
    check_identical(loss, f"{game_id}/loss")
    save(loss, rec_dir / "loss.rec")


K1, K2, K3, K4, K5 = (kind_action(k) for k in (
    ActionKind.KEY1, ActionKind.KEY2, ActionKind.KEY3, ActionKind.KEY4, ActionKind.KEY5,
))

# smp1: solve the bare first room, then walk straight up into a pit.
# smp2: dump all eight shots at the unchanged default aim (a miss).
LOSS_ACTIONS = {
    "smp1": [K4, K4, K4, K1],
    "smp2": [K5] * 8,
    "tiny": [K1, K1],
    "degn": [K2, K2, K2],
}


def build_fixture_recordings() -> None:
    rec_dir = DATA / "recordings"

    tiny_win = record_actions(
        "tiny", 0, [K2] * 5 + [K2, K3, K2, K2, K2], source="authored", participant="optimal"
    )
    assert tiny_win.outcome == "win"
    save(tiny_win, rec_dir / "tiny" / "win.rec")
    tiny_loss = record_actions("tiny", 0, LOSS_ACTIONS["tiny"], source="authored", participant="loss")
    assert tiny_loss.outcome == "loss"
    save(tiny_loss, rec_dir / "tiny" / "loss.rec")

    gauntlet = [K1 if step == 0 else K2 for step in GAUNTLET]
    degn_win = record_actions(
        "degn", 0, [K2, K2] + gauntlet, source="authored", participant="optimal"
    )
    assert degn_win.outcome == "win", degn_win.outcome
    save(degn_win, rec_dir / "degn" / "win.rec")
    degn_loss = record_actions("degn", 0, LOSS_ACTIONS["degn"], source="authored", participant="loss")
    assert degn_loss.outcome == "loss", degn_loss.outcome
    save(degn_loss, rec_dir / "degn" / "loss.rec")


def main() -> int:
    ensure_builtins()
    register_fixture_environments()
    for game_id in ("smp1", "smp2"):
        build_benchmark_env(game_id)
    build_fixture_recordings()
    print("all artifacts regenerated under", DATA)
    return 0


if __name__ == "__main__":
    sys.exit(main())
