"""Deterministic random streams for Monte Carlo work.

Every stream is a Philox (counter-based) generator keyed by a master seed
plus an integer path such as ``(scheme, point, chunk)``. Trials are grouped
into fixed-size chunks, and the chunk boundaries depend only on the trial
count, so any partition of chunks across workers draws the same numbers.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

#: Trials per chunk. Fixed so results never depend on worker count.
CHUNK_TRIALS = 1 << 18


def derive_stream(master_seed: int, *key: int) -> np.random.Generator:
    """Return the generator for ``key`` under ``master_seed``."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator, an integer seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.Generator(np.random.Philox(rng))
    raise TypeError(f"expected a numpy Generator or integer seed, got {type(rng).__name__}")


def chunk_sizes(trials: int, chunk: int = CHUNK_TRIALS) -> Iterator[int]:
    full, rest = divmod(int(trials), chunk)
    for _ in range(full):
        yield chunk
    if rest:
        yield rest
