"""Command-line entry points.

    gridbench validate <game_id>            full qualification, exit 0 iff pass
    gridbench explore <game_id> --level N   state-graph exploration + report
    gridbench score --recording R --baseline B
    gridbench replay <file> [--verify | --dump-frames DIR]
    gridbench serve --port N
    gridbench agent-run --endpoint URL --dataset smp1,smp2
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import artifacts
from .engine import ensure_builtins, get_environment
from .envs.fixtures import register_fixture_environments
from .recording import frames_at, loads_recording, replay
from .regimes import qualify
from .scoring import (
    format_scorecard,
    read_baseline,
    score_recording,
    write_scorecard,
)
from .stategraph import Budgets, build_state_graph, write_graph
from .winprob import estimate_win_probability


def _cmd_validate(args: argparse.Namespace) -> int:
    register_fixture_environments()
    recordings = list(artifacts.list_recordings(args.game_id).values())
    if args.recordings_dir:
        recordings = [
            loads_recording(p.read_text())
            for p in sorted(Path(args.recordings_dir).glob("*.rec"))
        ]
    regime_configs = None
    if args.quick:
        # Smoke mode: a reduced sanity regime only. All other layers
        # (replays, graph thresholds) still run; not a qualification.
        from .regimes import RegimeConfig, RegimeKind

        regime_configs = [RegimeConfig(RegimeKind.SANITY_50K, 10_000, (0,))]
    report = qualify(args.game_id, recordings, regime_configs=regime_configs)
    print(report.to_text())
    if args.out:
        Path(args.out).write_text(report.to_text() + "\n")
    return 0 if report.passed else 1


def _cmd_explore(args: argparse.Namespace) -> int:
    register_fixture_environments()
    budgets = Budgets(
        max_steps=args.max_steps,
        max_seconds=args.max_seconds,
        max_nodes=args.max_nodes,
        max_edges=args.max_edges,
    )
    graph = build_state_graph(args.game_id, args.level, budgets)
    wp = estimate_win_probability(graph)

    graph_path = Path(args.out or f"{args.game_id}-L{args.level}.graph")
    with graph_path.open("w") as fh:
        write_graph(graph, fh)

    s = graph.stats
    lines = [
        f"exploration report: {args.game_id} level {args.level}",
        f"nodes: {s.node_count}",
        f"edges: {s.edge_count} ({s.stored_edge_count} stored)",
        f"merge density: {s.merge_density:.4f}",
        f"max depth: {s.max_depth}",
        f"self loops: {s.self_loop_count}",
        f"cycle detected: {s.cycle_detected}",
        f"fully explored: {s.fully_explored}",
        f"steps used: {s.steps_used}",
        f"seconds: {s.seconds_used:.2f}",
        f"win probability: method={wp.method.value} lower={wp.lower!r} upper={wp.upper!r}"
        + (f" exact={wp.exact!r}" if wp.exact is not None else ""),
    ]
    text = "\n".join(lines)
    print(text)
    report_path = Path(args.report or f"{args.game_id}-L{args.level}.report")
    report_path.write_text(text + "\n")
    print(f"\ngraph written to {graph_path}, report to {report_path}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    recording = loads_recording(Path(args.recording).read_text())
    with open(args.baseline) as fh:
        baseline = read_baseline(fh)
    card = score_recording(recording, baseline)
    print(format_scorecard(card))
    if args.out:
        with open(args.out, "w") as fh:
            write_scorecard(card, fh)
        print(f"scorecard written to {args.out}")
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    register_fixture_environments()
    recording = loads_recording(Path(args.file).read_text())
    if args.dump_frames:
        from PIL import Image

        from .palette import PALETTE

        out_dir = Path(args.dump_frames)
        out_dir.mkdir(parents=True, exist_ok=True)
        flat = [c for rgb in PALETTE for c in rgb] + [0] * (768 - 48)
        for index in range(len(recording.actions) + 1):
            for j, frame in enumerate(frames_at(recording, index)):
                img = Image.fromarray(frame, mode="P")
                img.putpalette(flat)
                img.save(out_dir / f"{index:05d}_{j}.png")
        print(f"wrote frames for {len(recording.actions) + 1} positions to {out_dir}")
        return 0
    result = replay(recording)
    if result.identical:
        print(f"identical ({len(recording.actions)} actions, outcome {recording.outcome})")
        return 0
    print(f"MISMATCH at index {result.mismatch_index}: {result.detail}")
    return 1


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import make_app

    baselines = artifacts.available_baselines()
    if args.baselines:
        baselines = {}
        for path in Path(args.baselines).glob("*.baseline"):
            with path.open() as fh:
                b = read_baseline(fh)
            baselines[b.game_id] = b
    app = make_app(baselines=baselines, max_sessions=args.max_sessions)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_agent_run(args: argparse.Namespace) -> int:
    from .agent_runner import AgentRunConfig, run_reference_agent
    from .recording import dumps_recording
    from .scoring import write_scorecard

    config = AgentRunConfig(
        dataset=tuple(args.dataset.split(",")),
        endpoint_url=args.endpoint,
        api_key_env=args.api_key_env,
        model=args.model,
        cutoff_multiplier=args.cutoff,
        seed=args.seed,
    )
    baselines = artifacts.available_baselines()
    result = run_reference_agent(config, baselines)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for run in result.runs:
        (out_dir / f"{run.game_id}.rec").write_text(dumps_recording(run.recording))
        with (out_dir / f"{run.game_id}.scorecard").open("w") as fh:
            write_scorecard(run.scorecard, fh)
        print(format_scorecard(run.scorecard))
        print()
    print(f"total benchmark score: {result.total:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="run full qualification on an environment")
    p.add_argument("game_id")
    p.add_argument("--recordings-dir", help="override the committed recordings")
    p.add_argument("--out", help="write the report to a file")
    p.add_argument("--quick", action="store_true", help="smoke mode: reduced random budgets")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("explore", help="build a state graph and win-probability report")
    p.add_argument("game_id")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--max-nodes", type=int, default=None)
    p.add_argument("--max-edges", type=int, default=None)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--max-seconds", type=float, default=60.0)
    p.add_argument("--out", help="graph file path")
    p.add_argument("--report", help="report file path")
    p.set_defaults(func=_cmd_explore)

    p = sub.add_parser("score", help="score a recording against a baseline file")
    p.add_argument("--recording", required=True)
    p.add_argument("--baseline", required=True)
    p.add_argument("--out", help="write a scorecard file")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("replay", help="verify or dump a recording")
    p.add_argument("file")
    p.add_argument("--verify", action="store_true", default=True)
    p.add_argument("--dump-frames", metavar="DIR")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--baselines", help="directory of .baseline files")
    p.add_argument("--max-sessions", type=int, default=256)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("agent-run", help="drive a model endpoint across environments")
    p.add_argument("--endpoint", required=True)
    p.add_argument("--dataset", required=True, help="comma-separated game ids")
    p.add_argument("--model", default="")
    p.add_argument("--api-key-env", default="GRIDBENCH_API_KEY")
    p.add_argument("--cutoff", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="agent-runs")
    p.set_defaults(func=_cmd_agent_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    ensure_builtins()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
