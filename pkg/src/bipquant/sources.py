"""Reproducible Bernoulli(1/2) sources.

Each source comes from its own Philox stream keyed by the seed, so a
source depends only on ``(n, seed)`` and not on how many other sources were
drawn before it or on which thread drew it.
"""

from __future__ import annotations

import numpy as np

__all__ = ["random_source", "derived_seeds"]


def random_source(n: int, seed: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=int(seed) % (1 << 64)))
    return gen.integers(0, 2, size=n, dtype=np.uint8)


def derived_seeds(seed: int, count: int) -> list[int]:
    """``count`` well-separated 63-bit seeds derived from ``seed``."""
    state = np.random.SeedSequence(int(seed)).generate_state(count, dtype=np.uint64)
    return [int(x) >> 1 for x in state]
