"""Counter-based random number streams.

Every stochastic routine takes an explicit seed and derives independent
streams through Philox (counter-based, splittable); there is no ambient
randomness anywhere in the package.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for ``seed`` and an optional stream path."""
    if seed is None:
        raise ValueError("seed is mandatory for stochastic paths")
    ss = np.random.SeedSequence(entropy=int(seed),
                                spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))
