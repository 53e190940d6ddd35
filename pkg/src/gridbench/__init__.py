"""Turn-based 64x64 grid environments with validation and scoring tooling.

The engine runs deterministic, seeded, strictly turn-based sessions
over registered environments. Around it sit: exhaustive and budgeted
state-graph exploration with random-policy win probabilities, staged
random-play qualification regimes, action-efficiency scoring against
frozen human baselines, bit-exact recording replay, an HTTP session
service, and a harness-free model runner.

Quick start:

    import gridbench as gb

    gb.ensure_builtins()
    session = gb.open_session("smp1", seed=0)
    transition = session.step(gb.KEY4)
"""

from .engine import (
    Action,
    ActionKind,
    EnvironmentSpec,
    GRID_SIZE,
    KEY1,
    KEY2,
    KEY3,
    KEY4,
    KEY5,
    MalformedFrame,
    NUM_COLORS,
    RESET,
    Session,
    SessionStatus,
    SessionTerminal,
    Transition,
    UNDO,
    UnknownGameId,
    UnsupportedAction,
    ensure_builtins,
    format_action,
    get_environment,
    open_session,
    parse_action,
    register_environment,
    registered_game_ids,
    select,
    validate_frame,
)
from .envs import register_builtin_environments
from .envs.oracle import StateSpaceTooLarge, oracle_enumerate
from .recording import (
    Recorder,
    Recording,
    ReplayResult,
    frames_at,
    loads_recording,
    dumps_recording,
    record_actions,
    replay,
)
from .regimes import (
    QualificationReport,
    RegimeConfig,
    RegimeKind,
    RegimeReport,
    default_config,
    qualify,
    run_regime,
)
from .scoring import (
    HumanBaseline,
    Scorecard,
    attempt_filter,
    cutoff_budget,
    environment_score,
    extract_baseline,
    level_efficiency,
    level_weights,
    score_recording,
    total_score,
)
from .stategraph import Budgets, StateGraph, build_state_graph, shortest_win_path
from .winprob import (
    Method,
    MonteCarloResult,
    WinProbability,
    binomial_interval,
    estimate_win_probability,
    monte_carlo_win_rate,
)

__version__ = "0.1.0"
