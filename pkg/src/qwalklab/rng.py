"""Random-number discipline.

Every stochastic component draws from a counter-based Philox generator so
results are reproducible across platforms and across thread counts.  A
stream is identified by a key (an int or a tuple of ints); derived streams
are obtained by extending the key, never by sharing generator state.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

Key = Union[int, Sequence[int]]


def make_rng(key: Key) -> np.random.Generator:
    """Return a fresh Philox generator for the given stream key."""
    if isinstance(key, (int, np.integer)):
        key = (int(key),)
    else:
        key = tuple(int(k) for k in key)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def run_key(master_seed: int, run_index: int) -> tuple[int, int]:
    """Stream key for the run_index-th repetition under a master seed."""
    return (int(master_seed), int(run_index))
