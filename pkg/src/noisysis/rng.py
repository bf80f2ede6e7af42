"""Seed handling.

Every replica gets its own generator derived from ``(seed, *key)`` through
:class:`numpy.random.SeedSequence`, whose entropy pool hashes the spawn key
with a 32-bit-word mixing function. Streams for distinct keys are
statistically independent and do not depend on how work is scheduled.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    """Generator for sub-stream ``key`` of ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def derive_seed(seed: int, *key: int) -> int:
    """A 63-bit integer seed for sub-stream ``key`` (for APIs taking ints)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
