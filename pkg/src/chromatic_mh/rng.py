"""Seeded random streams.

Every random draw in the package comes from a generator built by
:func:`stream`. A stream is identified by ``(seed, purpose, *index)`` and is
derived with ``numpy.random.SeedSequence(seed, spawn_key=(purpose, *index))``
feeding a PCG64 bit generator. Two streams with different keys are
statistically independent, and a stream never depends on which process or
thread consumes it. That is what makes sampler traces identical for any number
of workers: region chains draw from ``stream(seed, REGION, epoch, color, region)``
no matter where they run.
"""

from __future__ import annotations

import numpy as np

# purpose codes, part of the derivation key; never renumber
WORLD = 1
REGION = 2
SCHEDULER = 3
BOOTSTRAP = 4
EXPERIMENT = 5


def stream(seed, purpose, *index):
    """Return a fresh ``numpy.random.Generator`` for the given key."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    key = (int(purpose),) + tuple(int(i) for i in index)
    seq = np.random.SeedSequence(int(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(seq))


def derive_seed(seed, purpose, *index):
    """Derive a child 63-bit integer seed, e.g. per-run seeds in an experiment."""
    key = (int(purpose),) + tuple(int(i) for i in index)
    seq = np.random.SeedSequence(int(seed), spawn_key=key)
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
