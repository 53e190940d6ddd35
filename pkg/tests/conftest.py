from __future__ import annotations

import pytest

from gridbench.engine import ensure_builtins
from gridbench.envs.fixtures import register_fixture_environments


@pytest.fixture(scope="session", autouse=True)
def _registry():
    ensure_builtins()
    register_fixture_environments()
