"""Action-efficiency scoring against human baselines.

A solved level scores min(1, h/a)^2: the agent's action count ``a`` is
compared to the human baseline ``h`` (the second-best first-run human
count for that level), capped at parity so a degenerate exploit cannot
dominate, and squared so deep inefficiency is penalized harder than the
linear ratio would. Level scores combine into an environment score by a
linearly weighted average (level l gets weight l, so late levels
dominate), and environment scores average into the benchmark total.

Integer-ratio arithmetic keeps the documented worked examples exact:
(h*h)/(a*a) evaluates 10 vs 100 to exactly 0.01.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO

from .hashing import content_digest, digest_hex
from .recording import Recording

UNSOLVED = None  # sentinel for a level that was never completed

DEFAULT_CUTOFF_MULTIPLIER = 5
MAX_ATTEMPT_MINUTES = 30
MIN_ATTEMPT_ACTIONS = 30


class NonPositiveBaseline(ValueError):
    pass


class EmptyLevelList(ValueError):
    pass


class EmptyDataset(ValueError):
    pass


class InsufficientSolvers(ValueError):
    """Fewer than two participants fully solved the environment."""


def level_efficiency(h: int, a: Optional[int]) -> float:
    """Capped, squared efficiency of ``a`` actions against baseline ``h``."""
    if h < 1:
        raise NonPositiveBaseline(f"baseline must be >= 1, got {h}")
    if a is UNSOLVED:
        return 0.0
    if a < 1:
        raise ValueError(f"action count must be >= 1 when solved, got {a}")
    if a <= h:
        return 1.0
    return (h * h) / (a * a)


def level_weights(n: int) -> list[float]:
    """Normalized linear weights for an n-level environment."""
    if n < 1:
        raise EmptyLevelList("environment must have at least one level")
    total = n * (n + 1) // 2
    return [l / total for l in range(1, n + 1)]


def environment_score(level_scores: Sequence[float], n: Optional[int] = None) -> float:
    """Linearly weighted average; level l carries weight l."""
    if n is None:
        n = len(level_scores)
    if n < 1 or not level_scores:
        raise EmptyLevelList("environment must have at least one level score")
    if len(level_scores) != n:
        raise ValueError(f"expected {n} level scores, got {len(level_scores)}")
    total = n * (n + 1) // 2
    return sum(l * s for l, s in enumerate(level_scores, start=1)) / total


def total_score(environment_scores: Sequence[float]) -> float:
    """Mean environment score across the dataset."""
    if not environment_scores:
        raise EmptyDataset("dataset must contain at least one environment")
    return sum(environment_scores) / len(environment_scores)


def cutoff_budget(h: int, multiplier: int = DEFAULT_CUTOFF_MULTIPLIER) -> int:
    """Hard per-level action budget for agent runs (5x baseline)."""
    if h < 1:
        raise NonPositiveBaseline(f"baseline must be >= 1, got {h}")
    if multiplier < 1:
        raise ValueError("cutoff multiplier must be >= 1")
    return h * multiplier


# ---------------------------------------------------------------------------
# Attempt filtering and baseline extraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AttemptFilterResult:
    valid: bool
    reason: Optional[str] = None  # "too_few_actions" | "too_long"


def attempt_filter(total_actions: int, duration_ms: int) -> AttemptFilterResult:
    """An attempt needs more than 30 actions and less than 30 minutes."""
    if total_actions <= MIN_ATTEMPT_ACTIONS:
        return AttemptFilterResult(False, "too_few_actions")
    if duration_ms >= MAX_ATTEMPT_MINUTES * 60_000:
        return AttemptFilterResult(False, "too_long")
    return AttemptFilterResult(True)


@dataclass(frozen=True)
class ParticipantAttempt:
    """One participant's single first-run attempt at an environment."""

    participant: str
    level_actions: dict[int, int]  # level -> actions, entered levels only
    solved_levels: frozenset[int]
    total_actions: int
    duration_ms: int

    @classmethod
    def from_recording(cls, recording: Recording) -> "ParticipantAttempt":
        return cls(
            participant=recording.participant,
            level_actions=recording.level_action_counts(),
            solved_levels=frozenset(recording.solved_levels()),
            total_actions=recording.total_actions(),
            duration_ms=recording.duration_ms(),
        )


@dataclass(frozen=True)
class HumanBaseline:
    """Frozen per-level reference counts for one environment.

    ``h`` is the second-best per-level count among participants who
    solved that level; ``best_first_run`` the best count regardless of
    participant; ``optimal_reference`` the authored known-mechanics
    lower bound. Per level: optimal <= best_first_run <= h.
    """

    game_id: str
    h: tuple[int, ...]
    best_first_run: tuple[int, ...]
    optimal_reference: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.h)
        if not (len(self.best_first_run) == len(self.optimal_reference) == n) or n < 1:
            raise ValueError("per-level arrays must be non-empty and equal length")
        for l in range(n):
            if not 1 <= self.optimal_reference[l] <= self.best_first_run[l] <= self.h[l]:
                raise ValueError(
                    f"level {l + 1}: expected 1 <= optimal <= best <= h, got "
                    f"{self.optimal_reference[l]}, {self.best_first_run[l]}, {self.h[l]}"
                )

    @property
    def level_count(self) -> int:
        return len(self.h)

    def h_for(self, level: int) -> int:
        return self.h[level - 1]


def extract_baseline(
    attempts: Iterable[ParticipantAttempt],
    game_id: str,
    level_count: int,
    optimal_counts: Sequence[int],
) -> HumanBaseline:
    """Derive the frozen baseline from first-run attempts.

    Attempts failing the 30-action/30-minute filter are discarded. The
    environment is only eligible when at least two remaining
    participants solved every level. Per level, ``h`` is the second
    order statistic over the counts of that level's solvers.
    """
    usable = [
        a for a in attempts if attempt_filter(a.total_actions, a.duration_ms).valid
    ]
    all_levels = set(range(1, level_count + 1))
    full_solvers = [a for a in usable if all_levels <= a.solved_levels]
    if len(full_solvers) < 2:
        raise InsufficientSolvers(
            f"{game_id}: {len(full_solvers)} full solver(s); at least 2 required"
        )
    h = []
    best = []
    for level in range(1, level_count + 1):
        counts = sorted(
            a.level_actions[level] for a in usable if level in a.solved_levels
        )
        h.append(counts[1])
        best.append(counts[0])
    return HumanBaseline(
        game_id=game_id,
        h=tuple(h),
        best_first_run=tuple(best),
        optimal_reference=tuple(optimal_counts),
    )


# ---------------------------------------------------------------------------
# Scorecards
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevelResult:
    level: int
    actions: Optional[int]  # None = unsolved
    score: float


@dataclass
class Scorecard:
    game_id: str
    baseline_fingerprint: str
    levels: list[LevelResult] = field(default_factory=list)

    @property
    def environment(self) -> float:
        return environment_score([r.score for r in self.levels])


def score_level_counts(
    counts: dict[int, Optional[int]], baseline: HumanBaseline
) -> Scorecard:
    """Score per-level action counts (None / missing = unsolved)."""
    card = Scorecard(baseline.game_id, baseline_fingerprint(baseline))
    for level in range(1, baseline.level_count + 1):
        a = counts.get(level, UNSOLVED)
        card.levels.append(LevelResult(level, a, level_efficiency(baseline.h_for(level), a)))
    return card


def score_recording(recording: Recording, baseline: HumanBaseline) -> Scorecard:
    """Score a finished run: a level's count stands only if it was solved."""
    if recording.game_id != baseline.game_id:
        raise ValueError(
            f"recording is for {recording.game_id!r}, baseline for {baseline.game_id!r}"
        )
    counts = recording.level_action_counts()
    solved = recording.solved_levels()
    return score_level_counts(
        {level: counts[level] for level in counts if level in solved}, baseline
    )


def format_scorecard(card: Scorecard) -> str:
    """Human-readable per-level table plus the environment score."""
    lines = [f"{card.game_id}  (baseline {card.baseline_fingerprint})"]
    lines.append("level  actions   score")
    for r in card.levels:
        actions = "-" if r.actions is None else str(r.actions)
        lines.append(f"{r.level:>5}  {actions:>7}  {r.score:.4f}")
    lines.append(f"environment score: {card.environment:.6f}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Baseline and scorecard files
# ---------------------------------------------------------------------------


def write_baseline(baseline: HumanBaseline, out: TextIO) -> None:
    out.write("gridbaseline 1\n")
    out.write(f"game {baseline.game_id}\n")
    out.write(f"levels {baseline.level_count}\n")
    for l in range(baseline.level_count):
        out.write(
            f"level {l + 1} h {baseline.h[l]} best {baseline.best_first_run[l]} "
            f"optimal {baseline.optimal_reference[l]}\n"
        )


def dumps_baseline(baseline: HumanBaseline) -> str:
    buf = io.StringIO()
    write_baseline(baseline, buf)
    return buf.getvalue()


def read_baseline(inp: TextIO) -> HumanBaseline:
    header = inp.readline().split()
    if header != ["gridbaseline", "1"]:
        raise ValueError(f"not a gridbaseline file: {header}")
    game_id = inp.readline().split()[1]
    level_count = int(inp.readline().split()[1])
    h, best, optimal = [], [], []
    for _ in range(level_count):
        parts = inp.readline().split()
        if parts[:1] != ["level"] or len(parts) != 8:
            raise ValueError(f"bad level record: {parts}")
        h.append(int(parts[3]))
        best.append(int(parts[5]))
        optimal.append(int(parts[7]))
    return HumanBaseline(game_id, tuple(h), tuple(best), tuple(optimal))


def baseline_fingerprint(baseline: HumanBaseline) -> str:
    """Stable content hash; scorecards cite the exact baseline used."""
    return digest_hex(content_digest(dumps_baseline(baseline).encode()))


def write_scorecard(card: Scorecard, out: TextIO) -> None:
    out.write("gridscorecard 1\n")
    out.write(f"game {card.game_id}\n")
    out.write(f"baseline {card.baseline_fingerprint}\n")
    for r in card.levels:
        actions = "-" if r.actions is None else str(r.actions)
        out.write(f"level {r.level} actions {actions} score {r.score!r}\n")
    out.write(f"environment {card.environment!r}\n")
