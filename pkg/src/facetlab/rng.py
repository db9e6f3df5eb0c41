"""Reproducible random streams.

Every stream is a Philox (counter-based) generator whose key is derived from
the global seed and a path of integers, e.g. ``stream(seed, SUITE_ID, trial)``.
Streams for different paths are independent, and a stream depends only on its
path, never on scheduling order, so results are identical for any number of
workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "sign_rows", "tag"]


def tag(name: str) -> int:
    """Stable 32-bit integer for a string label (used as a path component)."""
    h = 2166136261
    for byte in name.encode("utf-8"):
        h = ((h ^ byte) * 16777619) & 0xFFFFFFFF
    return h


def stream(seed: int, *path: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seed must be non-negative")
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(seq))


def sign_rows(rng: np.random.Generator, rows: int, n: int) -> np.ndarray:
    """Uniform +-1 matrix of shape (rows, n), int8."""
    bits = rng.integers(0, 2, size=(rows, n), dtype=np.int8)
    return (2 * bits - 1).astype(np.int8)
