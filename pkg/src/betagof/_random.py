"""Keyed random streams.

Every random draw in the package comes from a generator addressed by a master
seed plus a tuple of integer keys (replicate index, role, ...). Streams are
therefore independent of scheduling, which keeps parallel runs reproducible.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed <= _MASK64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return seed


def stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for ``(seed, *key)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def label_key(label: str) -> int:
    """Stable integer key for a text label (used to key streams by name)."""
    return zlib.crc32(label.encode("utf-8"))
