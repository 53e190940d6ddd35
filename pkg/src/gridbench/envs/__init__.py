"""Built-in environments and the authoring interface.

Benchmark-grade environments (`smp1`, `smp2`) follow the full authoring
policy: a deliberately easy first level that teaches the interaction
pattern without instructions, six levels whose difficulty comes from
composing mechanics, at least two distinct mechanics per environment,
no text or cultural symbols, and random-play win probabilities kept
below the qualification threshold on non-tutorial levels. `tiny`
ignores those constraints on purpose; it is the exhaustive-enumeration
subject for the analysis tooling and is flagged non-benchmark.

Third-party environments subclass ``base.GridEnvironment`` and call
``engine.register_environment``; see base.py for the contract.
"""

from __future__ import annotations

from ..engine import EnvironmentSpec, register_environment
from .base import GridEnvironment, LevelDefinition
from .ballistics import TurretRange
from .corridor import TinyCorridor
from .oracle import OracleResult, StateSpaceTooLarge, oracle_enumerate
from .pusher import BlockPusher

_BUILTINS = (BlockPusher, TurretRange, TinyCorridor)


def register_builtin_environments() -> list[EnvironmentSpec]:
    """Register smp1, smp2, and tiny; idempotent. Returns their specs."""
    specs = []
    for cls in _BUILTINS:
        env = cls()
        try:
            register_environment(env)
        except ValueError:
            pass  # already registered
        specs.append(env.spec)
    return specs


__all__ = [
    "GridEnvironment",
    "LevelDefinition",
    "OracleResult",
    "StateSpaceTooLarge",
    "oracle_enumerate",
    "register_builtin_environments",
    "BlockPusher",
    "TurretRange",
    "TinyCorridor",
]
