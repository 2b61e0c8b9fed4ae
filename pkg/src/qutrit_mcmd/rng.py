"""Counter-based seed splitting.

Every random task derives its generator from the global seed plus an
integer key tuple, e.g. ``task_rng(seed, GRID, index)``. Task results
therefore do not depend on execution order or on how tasks are spread
over workers.
"""
from __future__ import annotations

import numpy as np

MAX_SEED = 2**64 - 1

# Stream identifiers keep experiment families apart under one global seed.
CALIBRATION = 1
GRID = 2
SEQUENCE = 3
SHOTS = 4
DELAY = 5
IQ = 6


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def task_rng(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def as_rng(seed) -> np.random.Generator:
    """Accept an int seed or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return task_rng(seed)
