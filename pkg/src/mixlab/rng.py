"""Deterministic, counter-based random streams for Monte Carlo work.

Every random draw in the package is a pure function of
``(master_seed, purpose, step, chunk)``.  Streams are realized as Philox
generators keyed through ``SeedSequence`` spawn keys, so results are
bit-identical no matter how path chunks are scheduled, and independent
ensembles can be coupled simply by reusing the master seed.

Paths are laid out in fixed-width chunks of ``CHUNK`` paths; a path's stream
index is ``(path // CHUNK, path % CHUNK)``.  Changing the chunk execution
order (or running chunks concurrently) cannot change any output.
"""

from __future__ import annotations

import numpy as np

# Fixed path-block width.  Part of the stream layout: changing it changes
# the noise realization, so it is a constant, not a knob.
CHUNK = 1 << 17

# Purpose labels keep independent uses of the same master seed decoupled.
PURPOSE_INCREMENTS = 1
PURPOSE_INITIAL = 2
PURPOSE_GENERIC = 3


def generator(master_seed: int, purpose: int, *key: int) -> np.random.Generator:
    """A Philox generator for the stream ``(master_seed, purpose, *key)``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(purpose, *key))
    return np.random.Generator(np.random.Philox(ss))


def normal_increments(master_seed: int, step: int, chunk_index: int,
                      n: int) -> np.ndarray:
    """Standard-normal pairs for one step of one path chunk, shape (n, 2)."""
    gen = generator(master_seed, PURPOSE_INCREMENTS, step, chunk_index)
    return gen.standard_normal((n, 2))


def chunk_ranges(n_paths: int):
    """Yield (chunk_index, start, stop) covering ``range(n_paths)``."""
    for c in range(0, (n_paths + CHUNK - 1) // CHUNK):
        yield c, c * CHUNK, min((c + 1) * CHUNK, n_paths)
