"""Seed derivation.

One integer seed governs a whole experiment.  Every component draws from
its own substream keyed by ``(seed, name, index, ...)`` so adding a
replicate or a scenario never perturbs the streams of the others.
"""
import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _key(k):
    if isinstance(k, str):
        return zlib.crc32(k.encode("utf-8"))
    return int(k) & _MASK64


def seed_sequence(seed, *keys):
    return np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(_key(k) for k in keys))


def substream(seed, *keys):
    """Independent generator for ``keys`` under ``seed``."""
    return np.random.default_rng(seed_sequence(seed, *keys))


def derive_seed(seed, *keys):
    """A 64-bit integer seed for ``keys`` under ``seed``."""
    lo, hi = seed_sequence(seed, *keys).generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)
