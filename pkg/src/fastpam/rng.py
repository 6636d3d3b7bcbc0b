"""Seeded random streams.

All randomness comes from numpy's PCG64 seeded through ``SeedSequence``;
independent restarts use spawned child sequences, so results depend only on
the seed and the restart number.
"""

import numpy as np

RNG_ID = "numpy.random.PCG64/SeedSequence"


def make_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn(seed, count):
    """``count`` independent generators derived from ``seed``."""
    return [
        np.random.Generator(np.random.PCG64(child))
        for child in np.random.SeedSequence(seed).spawn(count)
    ]
