"""Independent, named random streams derived from one session seed."""

from __future__ import annotations

import zlib

import numpy as np

STREAMS = ("teacher", "student", "harness")


def stream(seed: int, name: str) -> np.random.Generator:
    """Generator for component ``name``; stable across runs and processes."""
    if not name:
        raise ValueError("stream name must be non-empty")
    key = zlib.crc32(name.encode("ascii"))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(key,)))


def session_streams(seed: int) -> dict[str, np.random.Generator]:
    return {name: stream(seed, name) for name in STREAMS}
