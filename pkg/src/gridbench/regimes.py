"""Random-play qualification regimes and the full qualification gate.

Three staged random regimes gate an environment before analysis ever
runs: a 50k-step sanity pass and a 1M-step deep pass assert that no
non-tutorial level falls to uninformed random play (the tutorial level
is exempt; stumbling into it is acceptable by design), and a second
1M-step sweep acts as a fuzzing and performance harness that tolerates
wins but fails on crashes or malformed frames. The sweep alone samples
Undo, exercising history paths; the win-rate regimes draw from the
same action distribution the state-graph analysis models, so their
verdicts and the graph's win probabilities talk about the same policy.

Full qualification adds recording playback (one win and one loss trace
must re-execute identically) and the per-level random-win-probability
threshold of 1 in 10,000, certified by the exact graph solve when the
level is fully explorable and otherwise by bounds.
"""

from __future__ import annotations

import enum
import random
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .engine import (
    Action,
    ActionKind,
    GRID_SIZE,
    MalformedFrame,
    Session,
    format_action,
    get_environment,
    kind_action,
    validate_frame,
)
from .recording import Recording, ReplayResult, replay
from .stategraph import Budgets, build_state_graph
from .winprob import Method, estimate_win_probability, zero_win_upper_bound

WIN_RATE_THRESHOLD = 1e-4  # random policy must solve a level less often than this


class RegimeKind(enum.Enum):
    SANITY_50K = "sanity_50k"
    DEEP_1M = "deep_1m"
    SWEEP_1M = "sweep_1m"
    REPLAY_QUAL = "replay_qual"


@dataclass(frozen=True)
class RegimeConfig:
    kind: RegimeKind
    step_budget: int
    seeds: tuple[int, ...]
    per_level: bool = True
    episode_cap: int = 10_000

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ValueError("at least one seed required")
        if self.kind is RegimeKind.SANITY_50K and self.step_budget > 50_000:
            raise ValueError("sanity regime budget must be <= 50000")
        if self.kind in (RegimeKind.DEEP_1M, RegimeKind.SWEEP_1M):
            if self.step_budget != 1_000_000:
                raise ValueError(f"{self.kind.value} budget must be exactly 1000000")


def default_config(kind: RegimeKind) -> RegimeConfig:
    if kind is RegimeKind.SANITY_50K:
        return RegimeConfig(kind, 50_000, (0,))
    if kind is RegimeKind.DEEP_1M:
        return RegimeConfig(kind, 1_000_000, (0, 1, 2, 3, 4))
    if kind is RegimeKind.SWEEP_1M:
        return RegimeConfig(kind, 1_000_000, (0,))
    raise ValueError(f"no random-play defaults for {kind}")


@dataclass
class CrashRecord:
    level: int
    seed: int
    trace: tuple[str, ...]  # action tokens from episode start, reproducible
    error: str


@dataclass
class RegimeReport:
    game_id: str
    kind: RegimeKind
    wins_per_level: dict[int, int] = field(default_factory=dict)
    episodes_per_level: dict[int, int] = field(default_factory=dict)
    steps_per_level: dict[int, int] = field(default_factory=dict)
    crashes: list[CrashRecord] = field(default_factory=list)
    malformed_frames: list[CrashRecord] = field(default_factory=list)
    steps_executed: int = 0
    seconds: float = 0.0
    passed: bool = False
    failures: list[str] = field(default_factory=list)

    @property
    def steps_per_second(self) -> float:
        return self.steps_executed / self.seconds if self.seconds else 0.0


def _policy_actions(action_set, include_undo: bool) -> list[ActionKind]:
    kinds = [k for k in action_set if include_undo or k is not ActionKind.UNDO]
    return sorted(kinds, key=lambda k: k.value)


def run_regime(game_id: str, config: RegimeConfig) -> RegimeReport:
    """Execute one random regime and report wins, crashes, and throughput."""
    env = get_environment(game_id)
    spec = env.spec
    report = RegimeReport(game_id=game_id, kind=config.kind)
    include_undo = config.kind is RegimeKind.SWEEP_1M
    kinds = _policy_actions(spec.action_set, include_undo)
    always_validate = 2_000 if config.kind is RegimeKind.SWEEP_1M else 0

    levels = list(range(1, spec.level_count + 1))
    started = time.perf_counter()

    for seed in config.seeds:
        if config.per_level:
            per_level_budget = config.step_budget // len(levels)
            for level in levels:
                _run_level(
                    report, game_id, level, seed, per_level_budget, kinds, config,
                    always_validate,
                )
        else:
            _run_whole_env(
                report, game_id, seed, config.step_budget, kinds, config, always_validate
            )

    report.seconds = time.perf_counter() - started
    report.failures.extend(
        f"crash at level {c.level} seed {c.seed} after {len(c.trace)} action(s): {c.error}"
        for c in report.crashes
    )
    report.failures.extend(
        f"malformed frame at level {c.level} seed {c.seed}: {c.error}"
        for c in report.malformed_frames
    )
    if config.kind in (RegimeKind.SANITY_50K, RegimeKind.DEEP_1M):
        tutorial = spec.tutorial_level_index
        for level, wins in sorted(report.wins_per_level.items()):
            if wins and level != tutorial:
                report.failures.append(
                    f"level {level} won {wins} time(s) by random play"
                )
    report.passed = not report.failures
    return report


def _sample(rng: random.Random, kinds: list[ActionKind]) -> Action:
    kind = kinds[rng.randrange(len(kinds))]
    if kind is ActionKind.SELECT:
        return Action(ActionKind.SELECT, rng.randrange(GRID_SIZE), rng.randrange(GRID_SIZE))
    return kind_action(kind)


def _run_level(report, game_id, level, seed, budget, kinds, config, always_validate):
    rng = random.Random(f"{config.kind.value}:{seed}:{level}")
    steps = 0
    seen: set[int] = set()
    validated = 0
    session = Session.open(game_id, seed, start_level=level)
    trace: list[str] = []
    episode_steps = 0
    report.episodes_per_level.setdefault(level, 0)
    report.episodes_per_level[level] += 1
    while steps < budget:
        action = _sample(rng, kinds)
        trace.append(format_action(action))
        new_episode = False
        try:
            transition = session.step(action)
            steps += 1
            episode_steps += 1
            if transition.state_hash not in seen or validated < always_validate:
                seen.add(transition.state_hash)
                validated += 1
                for frame in transition.frames:
                    validate_frame(frame)
            if transition.level_completed:
                report.wins_per_level[level] = report.wins_per_level.get(level, 0) + 1
                new_episode = True
            elif transition.game_over:
                new_episode = True
            elif episode_steps >= config.episode_cap:
                new_episode = True
        except MalformedFrame as exc:
            steps += 1
            report.malformed_frames.append(CrashRecord(level, seed, tuple(trace), str(exc)))
            new_episode = True
        except Exception as exc:
            steps += 1
            report.crashes.append(CrashRecord(level, seed, tuple(trace), repr(exc)))
            new_episode = True
        if new_episode:
            session = Session.open(game_id, seed, start_level=level)
            trace.clear()
            episode_steps = 0
            report.episodes_per_level[level] += 1
    report.steps_per_level[level] = report.steps_per_level.get(level, 0) + steps
    report.steps_executed += steps


def _run_whole_env(report, game_id, seed, budget, kinds, config, always_validate):
    rng = random.Random(f"{config.kind.value}:{seed}:env")
    steps = 0
    seen: set[int] = set()
    validated = 0
    session = Session.open(game_id, seed)
    trace: list[str] = []
    episode_steps = 0
    report.episodes_per_level.setdefault(1, 0)
    report.episodes_per_level[1] += 1
    while steps < budget:
        level = session.current_level
        action = _sample(rng, kinds)
        trace.append(format_action(action))
        new_episode = False
        try:
            transition = session.step(action)
            steps += 1
            episode_steps += 1
            report.steps_per_level[level] = report.steps_per_level.get(level, 0) + 1
            if transition.state_hash not in seen or validated < always_validate:
                seen.add(transition.state_hash)
                validated += 1
                for frame in transition.frames:
                    validate_frame(frame)
            if transition.level_completed:
                report.wins_per_level[level] = report.wins_per_level.get(level, 0) + 1
                if transition.environment_completed:
                    new_episode = True
            elif transition.game_over or episode_steps >= config.episode_cap:
                new_episode = True
        except MalformedFrame as exc:
            steps += 1
            report.malformed_frames.append(CrashRecord(level, seed, tuple(trace), str(exc)))
            new_episode = True
        except Exception as exc:
            steps += 1
            report.crashes.append(CrashRecord(level, seed, tuple(trace), repr(exc)))
            new_episode = True
        if new_episode:
            session = Session.open(game_id, seed)
            trace.clear()
            episode_steps = 0
            report.episodes_per_level[1] += 1
    report.steps_executed += steps


# ---------------------------------------------------------------------------
# Full qualification
# ---------------------------------------------------------------------------


@dataclass
class LevelThresholdCheck:
    level: int
    bound: float
    method: str  # "exact" | "graph_upper" | "statistical"
    passed: bool
    exempt_tutorial: bool = False


@dataclass
class QualificationReport:
    game_id: str
    regimes: list[RegimeReport] = field(default_factory=list)
    replays: list[tuple[str, ReplayResult]] = field(default_factory=list)
    thresholds: list[LevelThresholdCheck] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)
    passed: bool = False
    seconds: float = 0.0

    def to_text(self) -> str:
        lines = [f"qualification report: {self.game_id}", ""]
        for r in self.regimes:
            wins = sum(r.wins_per_level.values())
            lines.append(
                f"  regime {r.kind.value}: {'pass' if r.passed else 'FAIL'} "
                f"({r.steps_executed} steps, {r.steps_per_second:,.0f} steps/s, "
                f"{wins} win(s), {len(r.crashes)} crash(es), "
                f"{len(r.malformed_frames)} malformed frame(s))"
            )
        for name, result in self.replays:
            status = "identical" if result.identical else f"MISMATCH at {result.mismatch_index}"
            lines.append(f"  replay {name}: {status}")
        for check in self.thresholds:
            verdict = "exempt (tutorial)" if check.exempt_tutorial else (
                "pass" if check.passed else "FAIL"
            )
            lines.append(
                f"  level {check.level}: P_win {check.method} bound {check.bound:.3e} "
                f"vs {WIN_RATE_THRESHOLD:.0e}: {verdict}"
            )
        lines.append("")
        for failure in self.failures:
            lines.append(f"  failure: {failure}")
        lines.append(f"verdict: {'PASS' if self.passed else 'FAIL'} ({self.seconds:.1f}s)")
        return "\n".join(lines)


def qualify(
    game_id: str,
    recordings: Sequence[Recording],
    *,
    regime_configs: Optional[Sequence[RegimeConfig]] = None,
    graph_budgets: Optional[Budgets] = None,
    threshold: float = WIN_RATE_THRESHOLD,
) -> QualificationReport:
    """Run every qualification layer and aggregate one verdict.

    ``recordings`` are the environment's committed traces; at least one
    winning and one losing trace must be present and re-execute
    identically.
    """
    env = get_environment(game_id)
    spec = env.spec
    started = time.perf_counter()
    report = QualificationReport(game_id=game_id)

    if regime_configs is None:
        regime_configs = [
            default_config(RegimeKind.SANITY_50K),
            default_config(RegimeKind.DEEP_1M),
            default_config(RegimeKind.SWEEP_1M),
        ]
    if graph_budgets is None:
        graph_budgets = Budgets(max_nodes=500_000, max_seconds=180.0)

    for config in regime_configs:
        regime_report = run_regime(game_id, config)
        report.regimes.append(regime_report)
        if not regime_report.passed:
            report.failures.append(f"regime {config.kind.value} failed")

    outcomes = {r.outcome for r in recordings}
    if not {"win", "loss"} <= outcomes:
        report.failures.append(
            f"need committed win and loss recordings, have outcomes {sorted(outcomes)}"
        )
    for i, recording in enumerate(recordings):
        result = replay(recording)
        name = f"{recording.source}/{recording.participant}#{i}({recording.outcome})"
        report.replays.append((name, result))
        if not result.identical:
            report.failures.append(f"replay mismatch on {name}: {result.detail}")

    episodes_per_level: dict[int, int] = {}
    wins_per_level: dict[int, int] = {}
    for regime_report in report.regimes:
        if regime_report.kind is RegimeKind.SWEEP_1M:
            continue
        for level, n in regime_report.episodes_per_level.items():
            episodes_per_level[level] = episodes_per_level.get(level, 0) + n
        for level, n in regime_report.wins_per_level.items():
            wins_per_level[level] = wins_per_level.get(level, 0) + n

    for level in range(1, spec.level_count + 1):
        if level == spec.tutorial_level_index:
            report.thresholds.append(LevelThresholdCheck(level, 0.0, "exempt", True, True))
            continue
        graph = build_state_graph(game_id, level, graph_budgets)
        wp = estimate_win_probability(graph)
        if wp.method is Method.EXACT_SOLVE:
            bound, method = wp.exact, "exact"
        else:
            bound, method = wp.upper, "graph_upper"
        if bound >= threshold and method == "graph_upper":
            # Exploration hit budgets; fall back to the one-sided 95%
            # bound implied by zero random wins across the regimes.
            if wins_per_level.get(level, 0) == 0 and episodes_per_level.get(level, 0):
                stat = zero_win_upper_bound(episodes_per_level[level])
                if stat < bound:
                    bound, method = stat, "statistical"
        passed = bound < threshold
        report.thresholds.append(LevelThresholdCheck(level, bound, method, passed))
        if not passed:
            report.failures.append(
                f"level {level} random-win bound {bound:.3e} ({method}) "
                f"not below {threshold:.0e}"
            )

    report.passed = not report.failures
    report.seconds = time.perf_counter() - started
    return report
