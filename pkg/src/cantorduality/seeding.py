"""Deterministic, splittable random streams.

Every randomized choice in the package draws from a generator keyed by
``(seed, *path)``, so a sub-task's stream depends only on its own key and
never on how work is scheduled across workers.
"""

from __future__ import annotations

import numpy as np

SEED_MASK = (1 << 64) - 1


def rng_for(seed: int, *path: int) -> np.random.Generator:
    key = [int(seed) & SEED_MASK] + [int(p) for p in path]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def random_word_value(rng: np.random.Generator, width: int) -> int:
    """Uniform integer in [0, 2**width) for arbitrary width."""
    value = 0
    done = 0
    while done < width:
        take = min(62, width - done)
        value |= int(rng.integers(0, 1 << take)) << done
        done += take
    return value
