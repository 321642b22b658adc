"""Deterministic seed derivation.

Every random operation in the package takes either a 64-bit unsigned
integer seed or an already-constructed numpy Generator.  Child seeds for
replicates and subcommands are derived by a stable keyed hash of the
master seed plus a label path, so any replicate can be re-run in
isolation and reproduces bit-for-bit.
"""

from __future__ import annotations

import hashlib

import numpy as np

MAX_SEED = 2**64 - 1


def child_seed(master: int, *parts: int | str) -> int:
    """Derive a 64-bit child seed from a master seed and a label path."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master)).encode())
    for p in parts:
        h.update(b"\x1f")
        h.update(str(p).encode())
    return int.from_bytes(h.digest(), "big")


def as_generator(seed: int | np.random.Generator) -> np.random.Generator:
    """Accept a seed or a Generator; return a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.default_rng(seed)
