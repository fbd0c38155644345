"""Counter-based random streams.

Every stream is a Philox generator keyed by a tuple of integers, typically
``(seed, trial)`` or ``(seed, chunk)``. Draws for a given key never depend on
how work is split across workers.
"""

from __future__ import annotations

import numpy as np

# Domain tags that keep streams for different purposes disjoint.
TRIAL = 0
QUENCHED = 1
CHUNK = 2
CALIBRATION = 3


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Return an independent generator keyed by ``(seed, *keys)``."""
    if seed < 0 or any(k < 0 for k in keys):
        raise ValueError("seed and keys must be nonnegative integers")
    ss = np.random.SeedSequence([int(seed), *(int(k) for k in keys)])
    return np.random.Generator(np.random.Philox(ss))


def trial_stream(seed: int, trial: int) -> np.random.Generator:
    return stream(seed, TRIAL, trial)


def chunk_stream(seed: int, chunk: int) -> np.random.Generator:
    return stream(seed, CHUNK, chunk)


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("an explicit random stream or seed is required")
    return stream(int(rng))
