"""Deterministic named random substreams.

Every run derives all of its randomness from a single root seed.  Substreams
are keyed by stable name hashes, so adding one consumer never perturbs the
draws seen by another.
"""

from __future__ import annotations

import zlib

import numpy as np


def substream(root_seed: int, *names: str) -> np.random.SeedSequence:
    """Child seed for the substream identified by ``names``."""
    key = tuple(zlib.crc32(name.encode("utf-8")) for name in names)
    return np.random.SeedSequence(root_seed, spawn_key=key)


def generator(root_seed: int, *names: str) -> np.random.Generator:
    """Generator drawing from the named substream of ``root_seed``."""
    return np.random.default_rng(substream(root_seed, *names))
