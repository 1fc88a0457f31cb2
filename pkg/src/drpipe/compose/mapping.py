"""Real-object pose -> substitute-asset placement."""

from __future__ import annotations

from dataclasses import dataclass

from ..core import IDENTITY_POSE, Pose6D, f32
from ..errors import ZeroExtent
from .asset import Asset

FIT_EXTENT = "fit_extent"
FIXED_SCALE = "fixed_scale"
FULL_POSE = "full_pose"
TRANSLATION_ONLY = "translation_only"


@dataclass(frozen=True)
class AnchorPolicy:
    mode: str = FIT_EXTENT
    scale: float = 1.0
    align: str = FULL_POSE

    def __post_init__(self):
        if self.mode not in (FIT_EXTENT, FIXED_SCALE):
            raise ValueError(f"unknown anchor mode {self.mode!r}")
        if self.align not in (FULL_POSE, TRANSLATION_ONLY):
            raise ValueError(f"unknown align {self.align!r}")
        if self.mode == FIXED_SCALE and not self.scale > 0:
            raise ValueError("fixed scale must be positive")


@dataclass(frozen=True)
class Placement:
    pose: Pose6D
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "scale", f32(self.scale))
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")


def map_pose(real_pose: Pose6D, real_extent, asset: Asset, policy: AnchorPolicy) -> Placement:
    if policy.mode == FIT_EXTENT:
        if min(real_extent) <= 0.0:
            raise ZeroExtent(f"fit_extent needs positive real extents, got {tuple(real_extent)}")
        scale = min(r / a for r, a in zip(real_extent, asset.local_extent))
    else:
        scale = policy.scale
    if policy.align == FULL_POSE:
        pose = Pose6D(real_pose.t, real_pose.q, real_pose.confidence)
    else:
        pose = Pose6D(real_pose.t, IDENTITY_POSE.q, real_pose.confidence)
    return Placement(pose=pose, scale=scale)
