"""Deterministic seed derivation.

Every random stream is keyed by a tuple of integers hanging off a master seed, e.g.
(master, N, trial, site, level).  Any sub-task can therefore be replayed on its own,
and the result does not depend on execution order.
"""

from __future__ import annotations

import numpy as np

SeedLike = "int | np.random.SeedSequence | None"


def seed_sequence(seed, *keys: int) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(keys))
    return np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))


def derive_seed(master: int, *keys: int) -> int:
    """64-bit integer seed for the stream (master, *keys)."""
    return int(seed_sequence(master, *keys).generate_state(1, dtype=np.uint64)[0])


def substream(seed, *keys: int) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        if keys:
            raise TypeError("cannot derive keyed substreams from a live Generator")
        return seed
    return np.random.default_rng(seed_sequence(seed, *keys))
