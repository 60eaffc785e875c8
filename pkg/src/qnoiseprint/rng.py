"""Seed derivation and counter-keyed random streams.

Every random draw in the package comes from a Philox4x64-10 bit generator
keyed through ``numpy.random.SeedSequence(entropy=seed, spawn_key=key)``.
The key is a tuple of integers (string tags are hashed with CRC-32), so a
stream is addressed by *what it is for* rather than by the order in which
streams happen to be requested.
"""
from __future__ import annotations

import zlib

import numpy as np

ALGORITHM = "numpy Philox4x64-10 keyed by SeedSequence(entropy=seed, spawn_key=key)"

U64_MAX = 2**64 - 1


def _key(parts) -> tuple[int, ...]:
    out = []
    for part in parts:
        if isinstance(part, str):
            out.append(zlib.crc32(part.encode()))
        else:
            part = int(part)
            if part < 0:
                raise ValueError("stream key components must be nonnegative")
            out.append(part)
    return tuple(out)


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= U64_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def generator(seed: int, *key) -> np.random.Generator:
    """Independent generator for stream ``key`` under ``seed``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=_key(key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key) -> int:
    """Deterministic 64-bit child seed, e.g. ``derive_seed(42, "auth", 1, 3, 7)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=_key(key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
