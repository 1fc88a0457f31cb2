"""Temporal-redundancy gates: the frame passer (2D bypass over a background
cache) and the early stop (3D pose reuse on near-identical pose features).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import Frame, InstanceMask, Pose6D, quat_geodesic_deg
from ..errors import DimMismatch, EmptyInstance, InvalidConfig, MissingPrevPose
from ..perception import PoseFeatures


@dataclass(frozen=True)
class GatingConfig:
    frame_passer_enabled: bool = True
    early_stop_enabled: bool = True
    tile_px: int = 16
    tau_cover: float = 1.0
    pose_eps_t: float = 1e-3
    pose_eps_r: float = 0.1
    keyframe_interval: int = 30
    es_sigma_t: float = 0.02
    es_sigma_e: float = 0.02
    es_threshold: float = 1.0
    region_dilation_px: int = 8

    def __post_init__(self):
        if self.tile_px < 1:
            raise InvalidConfig("tile_px must be >= 1")
        if not (0.0 < self.tau_cover <= 1.0):
            raise InvalidConfig("tau_cover must be in (0, 1]")
        if self.keyframe_interval < 1:
            raise InvalidConfig("keyframe_interval must be >= 1")
        for name in ("pose_eps_t", "pose_eps_r", "es_sigma_t", "es_sigma_e", "es_threshold"):
            if not getattr(self, name) > 0:
                raise InvalidConfig(f"{name} must be positive")
        if self.region_dilation_px < 0:
            raise InvalidConfig("region_dilation_px must be >= 0")


@dataclass(frozen=True)
class PixelRect:
    """Inclusive pixel bounds."""

    row0: int
    col0: int
    row1: int
    col1: int

    def slices(self) -> tuple[slice, slice]:
        return (slice(self.row0, self.row1 + 1), slice(self.col0, self.col1 + 1))

    @property
    def area(self) -> int:
        return (self.row1 - self.row0 + 1) * (self.col1 - self.col0 + 1)


@dataclass(frozen=True)
class Forward2D:
    pass


@dataclass(frozen=True)
class Bypass2D:
    patch: np.ndarray          # cached background pixels for the region
    region: PixelRect


@dataclass(frozen=True)
class Continue3D:
    distance: float | None = None


@dataclass(frozen=True)
class Reuse3D:
    prev_pose: Pose6D
    distance: float = 0.0


class BackgroundCache:
    """Observed-background tiles keyed to one reference camera pose.

    A tile is stored only when every one of its pixels carried a zero
    (background) label, so cached content is always something the camera
    actually saw. The cache clears itself when the camera moves beyond
    the configured pose tolerance. `frames_since_keyframe` counts frames
    since (and including) the last Forward, so a bypass run can never
    span a full keyframe interval.
    """

    def __init__(self, width: int, height: int, tile_px: int):
        self.width = width
        self.height = height
        self.tile_px = tile_px
        self.grid_h = -(-height // tile_px)
        self.grid_w = -(-width // tile_px)
        self.reference_camera_pose: Pose6D | None = None
        self.pixels = np.zeros((height, width, 3), dtype=np.uint8)
        self.present = np.zeros((self.grid_h, self.grid_w), dtype=bool)
        self.last_update = np.full((self.grid_h, self.grid_w), -1, dtype=np.int64)
        self.frames_since_keyframe = 0

    def clear(self) -> None:
        self.present[:] = False
        self.last_update[:] = -1
        self.reference_camera_pose = None

    def coverage(self, region: PixelRect) -> float:
        """Fraction of region pixels lying under present tiles."""
        if region.area == 0:
            return 0.0
        t = self.tile_px
        covered = 0
        ty0, ty1 = region.row0 // t, region.row1 // t
        tx0, tx1 = region.col0 // t, region.col1 // t
        for ty in range(ty0, ty1 + 1):
            ry0 = max(region.row0, ty * t)
            ry1 = min(region.row1, ty * t + t - 1)
            for tx in range(tx0, tx1 + 1):
                if self.present[ty, tx]:
                    rx0 = max(region.col0, tx * t)
                    rx1 = min(region.col1, tx * t + t - 1)
                    covered += (ry1 - ry0 + 1) * (rx1 - rx0 + 1)
        return covered / region.area


def pose_delta(a: Pose6D, b: Pose6D) -> tuple[float, float]:
    dt = math.dist(a.t, b.t)
    dr = quat_geodesic_deg(a.q, b.q)
    return dt, dr


def predict_region(prev_mask: InstanceMask, instance: int, dilation_px: int) -> PixelRect:
    rows, cols = np.nonzero(prev_mask.labels == instance)
    if rows.size == 0:
        raise EmptyInstance(f"instance {instance} not in previous mask")
    return PixelRect(
        row0=max(0, int(rows.min()) - dilation_px),
        col0=max(0, int(cols.min()) - dilation_px),
        row1=min(prev_mask.height - 1, int(rows.max()) + dilation_px),
        col1=min(prev_mask.width - 1, int(cols.max()) + dilation_px),
    )


def frame_passer_decide(
    cache: BackgroundCache,
    cfg: GatingConfig,
    camera_pose: Pose6D,
    predicted_region: PixelRect | None,
) -> Forward2D | Bypass2D:
    if not cfg.frame_passer_enabled or predicted_region is None:
        return Forward2D()
    if cache.frames_since_keyframe >= cfg.keyframe_interval:
        return Forward2D()
    if cache.reference_camera_pose is None:
        return Forward2D()
    dt, dr = pose_delta(camera_pose, cache.reference_camera_pose)
    if dt > cfg.pose_eps_t or dr > cfg.pose_eps_r:
        return Forward2D()
    if cache.coverage(predicted_region) < cfg.tau_cover:
        return Forward2D()
    patch = cache.pixels[predicted_region.slices()].copy()
    return Bypass2D(patch=patch, region=predicted_region)


def cache_update(
    cache: BackgroundCache,
    cfg: GatingConfig,
    frame: Frame,
    mask: InstanceMask,
    camera_pose: Pose6D,
) -> None:
    """Forward-path update: store all-background tiles, reset the keyframe counter."""
    if (frame.width, frame.height) != (cache.width, cache.height):
        raise DimMismatch("frame does not match cache dimensions")
    if (mask.width, mask.height) != (cache.width, cache.height):
        raise DimMismatch("mask does not match cache dimensions")
    if cache.reference_camera_pose is not None:
        dt, dr = pose_delta(camera_pose, cache.reference_camera_pose)
        if dt > cfg.pose_eps_t or dr > cfg.pose_eps_r:
            cache.clear()
    if cache.reference_camera_pose is None:
        cache.reference_camera_pose = camera_pose

    t = cache.tile_px
    pad_h = cache.grid_h * t - cache.height
    pad_w = cache.grid_w * t - cache.width
    background = np.pad(
        mask.labels == 0, ((0, pad_h), (0, pad_w)), constant_values=True
    )
    tile_ok = background.reshape(cache.grid_h, t, cache.grid_w, t).all(axis=(1, 3))
    if tile_ok.any():
        px_ok = np.repeat(np.repeat(tile_ok, t, axis=0), t, axis=1)[
            : cache.height, : cache.width
        ]
        cache.pixels[px_ok] = frame.pixels[px_ok]
        cache.present |= tile_ok
        cache.last_update[tile_ok] = frame.frame_id
    cache.frames_since_keyframe = 1


def cache_note_bypass(cache: BackgroundCache) -> None:
    cache.frames_since_keyframe += 1


def early_stop_decide(
    prev: PoseFeatures | None,
    curr: PoseFeatures,
    prev_pose: Pose6D | None,
    cfg: GatingConfig,
) -> Continue3D | Reuse3D:
    if not cfg.early_stop_enabled or prev is None:
        return Continue3D(distance=None)
    if prev_pose is None:
        raise MissingPrevPose("previous features present without a previous pose")
    dt = math.dist(curr.centroid_cam, prev.centroid_cam)
    de = math.dist(curr.extent_cam, prev.extent_cam)
    distance = max(dt / cfg.es_sigma_t, de / cfg.es_sigma_e)
    if distance <= cfg.es_threshold:
        return Reuse3D(prev_pose=prev_pose, distance=distance)
    return Continue3D(distance=distance)
