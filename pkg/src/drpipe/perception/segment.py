"""Reference instance segmentation: chroma keying + 4-connected components.

Components are labeled 1..k in order of their first pixel in row-major scan,
so two runs (or two implementations) agree exactly.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..core import Frame, InstanceMask
from ..errors import UnsupportedTargetMode
from .target import CHROMA_KEY, TargetSpec

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.int32)


def chroma_match(pixels: np.ndarray, colors, tolerance: int) -> np.ndarray:
    """True where max per-channel distance to any key color is <= tolerance."""
    px = pixels.astype(np.int16)
    match = np.zeros(px.shape[:2], dtype=bool)
    for color in colors:
        diff = np.abs(px - np.asarray(color, dtype=np.int16))
        match |= diff.max(axis=2) <= tolerance
    return match


def label_components(match: np.ndarray, min_px: int) -> np.ndarray:
    """4-connected components of `match`, small ones dropped, scan-order labels."""
    raw, n = ndimage.label(match, structure=FOUR_CONNECTED)
    if n == 0:
        return np.zeros(match.shape, dtype=np.uint16)
    sizes = np.bincount(raw.ravel(), minlength=n + 1)
    keep = sizes >= min_px
    keep[0] = False
    flat = raw.ravel()
    first_seen = np.full(n + 1, flat.size, dtype=np.int64)
    nz = np.flatnonzero(flat)
    # reversed assignment leaves the first (smallest) index in place
    first_seen[flat[nz[::-1]]] = nz[::-1]
    order = sorted(np.flatnonzero(keep), key=lambda lab: first_seen[lab])
    remap = np.zeros(n + 1, dtype=np.uint16)
    for new, old in enumerate(order, start=1):
        remap[old] = new
    return remap[raw]


def segment(frame: Frame, spec: TargetSpec) -> InstanceMask:
    if spec.mode != CHROMA_KEY:
        raise UnsupportedTargetMode(
            "reference segmenter needs key colors; instance_id targets require "
            "a mask-producing backend"
        )
    match = chroma_match(frame.pixels, spec.colors, spec.tolerance)
    labels = label_components(match, spec.min_instance_px)
    return InstanceMask(frame.width, frame.height, labels)


class ChromaKeySegmenter:
    def segment(self, frame: Frame, spec: TargetSpec) -> InstanceMask:
        return segment(frame, spec)
