"""Deterministic random streams.

Every stochastic operation in this package draws from a Philox4x64
counter-based generator. Streams are split hierarchically with numpy
SeedSequence spawn keys, so a corpus seed plus a stream path such as
(corpus_seed, 0, sram_index) always yields the same bit stream on every
platform. The Python stdlib generator and numpy's global state are never
used.
"""

from __future__ import annotations

from typing import Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence]


def substream(seed: SeedLike, *path: int) -> np.random.SeedSequence:
    """Derive a child SeedSequence for the given stream path.

    Path components must fit in 32 bits (numpy spawn-key words).
    """
    for p in path:
        if not 0 <= p < 2**32:
            raise ValueError(f"stream path component out of range: {p}")
    if isinstance(seed, np.random.SeedSequence):
        key = tuple(int(k) for k in seed.spawn_key) + path
        return np.random.SeedSequence(seed.entropy, spawn_key=key)
    return np.random.SeedSequence(int(seed), spawn_key=path)


def make_rng(seed: SeedLike | np.random.Generator, *path: int) -> np.random.Generator:
    """Build a Philox generator for (seed, path), or pass a Generator through."""
    if isinstance(seed, np.random.Generator):
        if path:
            raise ValueError("cannot re-key an existing Generator")
        return seed
    return np.random.Generator(np.random.Philox(substream(seed, *path)))
