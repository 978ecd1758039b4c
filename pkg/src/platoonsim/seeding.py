"""Deterministic derivation of named random sub-streams."""

from __future__ import annotations

import hashlib

import numpy as np


def stream_seed(master: int, *path) -> int:
    """Derive a 64-bit seed from a master seed and a label path.

    Uses SHA-256 over the repr of the path, so the mapping is stable across
    processes, platforms and PYTHONHASHSEED settings. Distinct paths give
    independent streams for all practical purposes.
    """
    text = repr((int(master),) + tuple(path)).encode("ascii")
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "little")


def generator(master: int, *path) -> np.random.Generator:
    """numpy Generator seeded from a named sub-stream."""
    return np.random.Generator(np.random.PCG64(stream_seed(master, *path)))
