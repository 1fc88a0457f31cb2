"""Target selection and the pluggable backend surface."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..core import f32
from ..errors import InvalidConfig

CHROMA_KEY = "chroma_key"
INSTANCE_ID = "instance_id"


@dataclass(frozen=True)
class TargetSpec:
    """Which real object gets removed.

    chroma_key: pixels within `tolerance` of any key color are candidates.
    instance_id: track a known instance label (requires a segmenter with its
    own mask source, e.g. the ground-truth backend used in tests).
    """

    mode: str = CHROMA_KEY
    colors: tuple = ()
    tolerance: int = 12
    label: int = 1
    min_instance_px: int = 16

    def __post_init__(self):
        if self.mode not in (CHROMA_KEY, INSTANCE_ID):
            raise InvalidConfig(f"unknown target mode {self.mode!r}")
        if not (0 <= self.tolerance <= 255):
            raise InvalidConfig(f"tolerance {self.tolerance} outside 0..255")
        if self.mode == CHROMA_KEY and not self.colors:
            raise InvalidConfig("chroma_key needs at least one key color")
        if self.min_instance_px < 1:
            raise InvalidConfig("min_instance_px must be >= 1")
        object.__setattr__(self, "colors", tuple(tuple(int(v) for v in c) for c in self.colors))


@dataclass(frozen=True)
class PoseFeatures:
    """Cheap per-frame pose summary used by the early-stop gate."""

    centroid_cam: tuple[float, float, float]
    extent_cam: tuple[float, float, float]
    mask_area_px: int

    def __post_init__(self):
        object.__setattr__(self, "centroid_cam", tuple(f32(v) for v in self.centroid_cam))
        object.__setattr__(self, "extent_cam", tuple(f32(v) for v in self.extent_cam))
        if self.mask_area_px < 1:
            raise ValueError("mask_area_px must be >= 1")
        if min(self.extent_cam) < 0:
            raise ValueError("extents must be non-negative")


@dataclass(frozen=True)
class BackendSet:
    """One implementation per perception stage; every stage is deterministic."""

    segmenter: object = None
    inpainter: object = None
    pose_estimator: object = None

    def __post_init__(self):
        from .inpaint import HarmonicInpainter
        from .pose import DepthPcaPoseEstimator
        from .segment import ChromaKeySegmenter

        if self.segmenter is None:
            object.__setattr__(self, "segmenter", ChromaKeySegmenter())
        if self.inpainter is None:
            object.__setattr__(self, "inpainter", HarmonicInpainter())
        if self.pose_estimator is None:
            object.__setattr__(self, "pose_estimator", DepthPcaPoseEstimator())


def default_backends() -> BackendSet:
    return BackendSet()
