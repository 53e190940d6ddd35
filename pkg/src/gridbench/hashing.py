"""Stable 64-bit state digests.

Digests identify environment states across sessions, platforms, and
builds, so they must not depend on process state (PYTHONHASHSEED) or on
library internals that may change. We use xxh64, a fixed, published,
non-cryptographic 64-bit hash, over a canonical byte serialization:

    b"gbs1" || game_id (4 ascii bytes) || u32 state_format_version
            || u32 level_index || u32 len(state_bytes) || state_bytes
            || frame bytes (4096 bytes, row-major uint8)

Changing an environment's hidden-state encoding requires bumping its
state_format_version, which deliberately invalidates old digests.
"""

from __future__ import annotations

import struct

import numpy as np
import xxhash

_HEADER = struct.Struct("<4s4sIII")
_MAGIC = b"gbs1"


def state_digest(
    game_id: str,
    state_format_version: int,
    level_index: int,
    state_bytes: bytes,
    frame: np.ndarray,
) -> int:
    """Digest of (level index, hidden state, rendered frame) as a 64-bit int."""
    header = _HEADER.pack(
        _MAGIC,
        game_id.encode("ascii"),
        state_format_version,
        level_index,
        len(state_bytes),
    )
    h = xxhash.xxh64(header)
    h.update(state_bytes)
    h.update(frame.tobytes())
    return h.intdigest()


def digest_hex(digest: int) -> str:
    """Fixed-width lowercase hex rendering used in recording and graph files."""
    return f"{digest:016x}"


def parse_digest(text: str) -> int:
    value = int(text, 16)
    if not 0 <= value < 1 << 64:
        raise ValueError(f"digest out of range: {text!r}")
    return value


def content_digest(data: bytes) -> int:
    """xxh64 of raw bytes; used to fingerprint baseline and recording files."""
    return xxhash.xxh64(data).intdigest()
