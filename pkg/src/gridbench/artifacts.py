"""Access to the committed recordings and baseline files.

These artifacts ship inside the package (``gridbench/data``): authored
optimal playthroughs, participant-style traces, win/loss regression
traces, and the frozen per-environment baselines extracted from them.
``scripts/make_artifacts.py`` regenerates everything; mechanics changes
invalidate digests, so regeneration is deliberate and reviewed.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .recording import Recording, loads_recording
from .scoring import HumanBaseline, read_baseline


def data_root() -> Path:
    return Path(resources.files("gridbench") / "data")


def list_recordings(game_id: str) -> dict[str, Recording]:
    """All committed recordings for one environment, keyed by file stem."""
    rec_dir = data_root() / "recordings" / game_id
    if not rec_dir.is_dir():
        return {}
    return {
        path.stem: loads_recording(path.read_text())
        for path in sorted(rec_dir.glob("*.rec"))
    }


def load_recording(game_id: str, name: str) -> Recording:
    path = data_root() / "recordings" / game_id / f"{name}.rec"
    return loads_recording(path.read_text())


def load_baseline(game_id: str) -> HumanBaseline:
    path = data_root() / "baselines" / f"{game_id}.baseline"
    with path.open() as fh:
        return read_baseline(fh)


def available_baselines() -> dict[str, HumanBaseline]:
    base_dir = data_root() / "baselines"
    out = {}
    for path in sorted(base_dir.glob("*.baseline")):
        with path.open() as fh:
            baseline = read_baseline(fh)
        out[baseline.game_id] = baseline
    return out
