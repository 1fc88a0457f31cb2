"""Procedural plane textures, sampled at world (x, y) on the background plane.

Every palette keeps all channels inside [60, 180]: at the default chroma
tolerance (12) no background pixel can match a saturated object face color.
"""

from __future__ import annotations

import numpy as np

from ..core.rand import splitmix64

CHECKER_TILE_M = 0.5
NOISE_CELL_M = 0.25
CHECKER_DARK = 80
CHECKER_LIGHT = 170


def sample(kind: str, seed: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if kind == "checkerboard":
        return _checkerboard(x, y)
    if kind == "gradient":
        return _gradient(x, y)
    if kind == "noise_texture":
        return _noise(seed, x, y)
    raise ValueError(f"unknown background kind {kind!r}")


def _checkerboard(x, y):
    parity = (np.floor(x / CHECKER_TILE_M) + np.floor(y / CHECKER_TILE_M)).astype(np.int64) & 1
    value = np.where(parity == 0, CHECKER_DARK, CHECKER_LIGHT).astype(np.uint8)
    return np.repeat(value[..., None], 3, axis=-1)


def _gradient(x, y):
    value = np.clip(np.floor(120.0 + 8.0 * x + 4.0 * y + 0.5), 60, 180).astype(np.uint8)
    return np.repeat(value[..., None], 3, axis=-1)


def _noise(seed, x, y):
    ix = np.floor(x / NOISE_CELL_M).astype(np.int64)
    iy = np.floor(y / NOISE_CELL_M).astype(np.int64)
    base = (
        ix.astype(np.uint64) * np.uint64(0x9E3779B9)
        ^ iy.astype(np.uint64) * np.uint64(0x85EBCA6B)
        ^ np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    )
    h = splitmix64(base)
    out = np.empty(x.shape + (3,), dtype=np.uint8)
    for c, shift in enumerate((0, 21, 42)):
        out[..., c] = (60 + ((h >> np.uint64(shift)) % np.uint64(121))).astype(np.uint8)
    return out
