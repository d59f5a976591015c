"""Seed derivation for reproducible, worker-count independent runs.

Streams are numpy ``Philox`` generators (counter-based) keyed by a
SplitMix64 hash of ``(base seed, run index, stream id)``. A run's numbers
therefore never depend on which worker executes it or in what order.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

STREAM_TRAJECTORY = 1
STREAM_MC = 2


def splitmix64(x: int) -> int:
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive(seed: int, *path: int) -> int:
    """Fold a path of integers into a 64-bit key."""
    key = splitmix64(seed & MASK64)
    for p in path:
        key = splitmix64(key ^ (p & MASK64))
    return key


def run_seed(seed: int, run_index: int) -> int:
    return derive(seed, run_index)


def generator(seed: int, *path: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive(seed, *path)))


def uniform(rng: np.random.Generator, lo, hi, size=None):
    """lo + u (hi - lo) with u a 53-bit double in [0, 1)."""
    return lo + rng.random(size) * (hi - lo)
