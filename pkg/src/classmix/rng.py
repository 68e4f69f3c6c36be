"""Deterministic, splittable random streams.

Every stream is derived from a 64-bit master seed plus an integer path, so
parallel tasks can draw independently while the whole run stays reproducible.
"""

from __future__ import annotations

import numpy as np


def make_stream(seed: int, *path: int) -> np.random.Generator:
    """Return a PCG64 generator keyed by (seed, path).

    Streams with equal (seed, path) are identical; distinct paths are
    statistically independent.
    """
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(seq))


def substream(seed: int, *path: int):
    """Factory fixing the master seed: substream(seed)(i, j) == make_stream(seed, i, j)."""
    base = tuple(int(p) for p in path)

    def make(*extra: int) -> np.random.Generator:
        return make_stream(seed, *base, *extra)

    return make
