"""Domain value types shared by every stage.

All types are immutable after construction; numpy buffers are marked
read-only so values can be shared freely between threads and sessions.
Float fields that ever travel the wire (poses, intrinsics) are quantized
to f32 precision at construction, so encode/decode round-trips and
local-vs-offload comparisons are bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quat
from ..errors import NonUnitQuaternion

MAX_DIM = 8192


def f32(x: float) -> float:
    """Round a float to the nearest binary32 value."""
    return float(np.float32(x))


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PinholeIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        for name in ("fx", "fy", "cx", "cy"):
            object.__setattr__(self, name, f32(getattr(self, name)))
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx} fy={self.fy}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.fx, self.fy, self.cx, self.cy)


@dataclass(frozen=True)
class Pose6D:
    """Rigid transform: translation in meters, unit quaternion (w, x, y, z)."""

    t: tuple[float, float, float]
    q: tuple[float, float, float, float]
    confidence: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(f32(v) for v in self.t))
        object.__setattr__(self, "q", tuple(f32(v) for v in self.q))
        object.__setattr__(self, "confidence", f32(self.confidence))
        if len(self.t) != 3 or len(self.q) != 4:
            raise ValueError("pose needs 3 translation and 4 quaternion components")
        quat.check_unit(self.q)
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    def rotation_matrix(self) -> np.ndarray:
        return quat.to_matrix(self.q)

    def transform(self, points: np.ndarray) -> np.ndarray:
        """Apply to (N, 3) points."""
        return points @ self.rotation_matrix().T + np.asarray(self.t)

    def inverse(self) -> "Pose6D":
        rt = self.rotation_matrix().T
        t = -rt @ np.asarray(self.t)
        return Pose6D(tuple(t), quat.conjugate(self.q), self.confidence)

    def compose(self, other: "Pose6D") -> "Pose6D":
        """self applied after other: (self * other)(p) = self(other(p))."""
        t = self.rotation_matrix() @ np.asarray(other.t) + np.asarray(self.t)
        return Pose6D(tuple(t), quat.mul(self.q, other.q), min(self.confidence, other.confidence))


IDENTITY_POSE = Pose6D((0.0, 0.0, 0.0), quat.IDENTITY)


def _check_dims(width: int, height: int) -> None:
    if not (0 < width <= MAX_DIM and 0 < height <= MAX_DIM):
        raise ValueError(f"dimensions {width}x{height} outside 1..{MAX_DIM}")


@dataclass(frozen=True, eq=False)
class Frame:
    """One captured RGB(+depth) raster with camera metadata."""

    frame_id: int
    capture_ts: int
    width: int
    height: int
    pixels: np.ndarray
    intrinsics: PinholeIntrinsics
    camera_pose: Pose6D = IDENTITY_POSE
    depth: np.ndarray | None = None

    def __post_init__(self):
        _check_dims(self.width, self.height)
        if self.frame_id < 0:
            raise ValueError("frame_id must be non-negative")
        px = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if px.shape != (self.height, self.width, 3):
            raise ValueError(f"pixels shape {px.shape} != {(self.height, self.width, 3)}")
        object.__setattr__(self, "pixels", _freeze(px))
        if self.depth is not None:
            d = np.ascontiguousarray(self.depth, dtype=np.float32)
            if d.shape != (self.height, self.width):
                raise ValueError(f"depth shape {d.shape} != {(self.height, self.width)}")
            object.__setattr__(self, "depth", _freeze(d))
        if not (0 <= self.intrinsics.cx < self.width and 0 <= self.intrinsics.cy < self.height):
            raise ValueError("principal point outside frame")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        if (self.frame_id, self.capture_ts, self.width, self.height) != (
            other.frame_id, other.capture_ts, other.width, other.height
        ):
            return False
        if self.intrinsics != other.intrinsics or self.camera_pose != other.camera_pose:
            return False
        if not np.array_equal(self.pixels, other.pixels):
            return False
        if (self.depth is None) != (other.depth is None):
            return False
        return self.depth is None or np.array_equal(self.depth, other.depth)

    def with_pixels(self, pixels: np.ndarray, depth: np.ndarray | None = None) -> "Frame":
        return Frame(
            frame_id=self.frame_id,
            capture_ts=self.capture_ts,
            width=self.width,
            height=self.height,
            pixels=pixels,
            intrinsics=self.intrinsics,
            camera_pose=self.camera_pose,
            depth=self.depth if depth is None else depth,
        )


@dataclass(frozen=True, eq=False)
class InstanceMask:
    """Per-pixel instance labels; 0 is background, instances are 1..instance_count."""

    width: int
    height: int
    labels: np.ndarray
    instance_count: int = field(init=False)

    def __post_init__(self):
        _check_dims(self.width, self.height)
        lab = np.ascontiguousarray(self.labels, dtype=np.uint16)
        if lab.shape != (self.height, self.width):
            raise ValueError(f"labels shape {lab.shape} != {(self.height, self.width)}")
        present = np.unique(lab)
        present = present[present > 0]
        count = int(present.size)
        if count and (present[0] != 1 or present[-1] != count):
            raise ValueError(f"labels must be contiguous 1..k, saw {present.tolist()}")
        object.__setattr__(self, "labels", _freeze(lab))
        object.__setattr__(self, "instance_count", count)

    def __eq__(self, other) -> bool:
        if not isinstance(other, InstanceMask):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.labels, other.labels)
        )

    @classmethod
    def empty(cls, width: int, height: int) -> "InstanceMask":
        return cls(width, height, np.zeros((height, width), dtype=np.uint16))

    @classmethod
    def from_bool(cls, covered: np.ndarray) -> "InstanceMask":
        h, w = covered.shape
        return cls(w, h, covered.astype(np.uint16))

    def has_instance(self, label: int) -> bool:
        return 1 <= label <= self.instance_count

    def instance_pixels(self, label: int) -> int:
        return int(np.count_nonzero(self.labels == label))
