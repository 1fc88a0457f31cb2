"""Deterministic PRNG seeding: one 64-bit seed reproduces everything."""

from __future__ import annotations

import hashlib

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & 0xFFFFFFFFFFFFFFFF))


def derive_seed(seed: int, *tags) -> int:
    """Independent stream seed for (seed, tags); stable across runs and platforms."""
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for tag in tags:
        h.update(b"/")
        h.update(str(tag).encode())
    return int.from_bytes(h.digest()[:8], "little")


def splitmix64(x: np.ndarray) -> np.ndarray:
    """Vectorized integer hash (u64 -> u64); used for procedural textures."""
    with np.errstate(over="ignore"):
        z = (x.astype(np.uint64) + np.uint64(0x9E3779B97F4A7C15))
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))
