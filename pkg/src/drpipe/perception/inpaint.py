"""Hole filling by discrete harmonic interpolation (Jacobi-iterated Laplace).

Chosen over patch methods because it has an independent brute-force oracle
(dense Jacobi run to convergence) and a testable maximum principle, and the
fast mode fits the real-time path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Frame, InstanceMask
from ..errors import DimMismatch, NoBoundary

FAST_DEFAULT_ITERS = 64
CONVERGED_DEFAULT_TOL = 1e-4
_MAX_ITERS = 200_000


@dataclass(frozen=True)
class Fast:
    iters: int = FAST_DEFAULT_ITERS

    def __post_init__(self):
        if self.iters < 0:
            raise ValueError("iters must be >= 0")


@dataclass(frozen=True)
class Converged:
    tol: float = CONVERGED_DEFAULT_TOL

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")


def _neighbor_ops(shape):
    """Per-pixel in-frame neighbor count for the 4-stencil."""
    h, w = shape
    count = np.full(shape, 4.0)
    count[0, :] -= 1
    count[-1, :] -= 1
    count[:, 0] -= 1
    count[:, -1] -= 1
    return count


def _neighbor_sum(u: np.ndarray) -> np.ndarray:
    s = np.zeros_like(u)
    s[1:, :] += u[:-1, :]
    s[:-1, :] += u[1:, :]
    s[:, 1:] += u[:, :-1]
    s[:, :-1] += u[:, 1:]
    return s


def inpaint(frame: Frame, mask: InstanceMask, quality=Fast()) -> Frame:
    if (mask.width, mask.height) != (frame.width, frame.height):
        raise DimMismatch(
            f"mask {mask.width}x{mask.height} vs frame {frame.width}x{frame.height}"
        )
    hole = mask.labels != 0
    if not hole.any():
        return frame

    rows = np.any(hole, axis=1).nonzero()[0]
    cols = np.any(hole, axis=0).nonzero()[0]
    y0 = max(0, rows[0] - 1)
    y1 = min(frame.height - 1, rows[-1] + 1)
    x0 = max(0, cols[0] - 1)
    x1 = min(frame.width - 1, cols[-1] + 1)
    win = (slice(y0, y1 + 1), slice(x0, x1 + 1))

    hole_w = hole[win]
    boundary_w = ~hole_w & (_neighbor_sum(hole_w.astype(np.float64)) > 0)
    if not boundary_w.any():
        raise NoBoundary("hole touches no non-hole pixel")

    px = frame.pixels[win].astype(np.float64)
    count = _neighbor_ops(hole_w.shape)
    init = px[boundary_w].mean(axis=0)
    u = px.copy()
    u[hole_w] = init

    if isinstance(quality, Fast):
        for _ in range(quality.iters):
            for c in range(3):
                ch = u[:, :, c]
                ch[hole_w] = (_neighbor_sum(ch) / count)[hole_w]
    elif isinstance(quality, Converged):
        for c in range(3):
            ch = u[:, :, c]
            for it in range(_MAX_ITERS):
                new = (_neighbor_sum(ch) / count)[hole_w]
                delta = np.abs(new - ch[hole_w]).max() if new.size else 0.0
                ch[hole_w] = new
                if delta < quality.tol:
                    break
            else:
                raise RuntimeError("converged-mode inpainting failed to converge")
    else:
        raise TypeError(f"unknown quality {quality!r}")

    out = frame.pixels.copy()
    filled = np.clip(np.floor(u + 0.5), 0, 255).astype(np.uint8)
    win_out = out[win]
    win_out[hole_w] = filled[hole_w]
    out[win] = win_out
    return frame.with_pixels(out)


class HarmonicInpainter:
    def inpaint(self, frame: Frame, mask: InstanceMask, quality=Fast()) -> Frame:
        return inpaint(frame, mask, quality)
