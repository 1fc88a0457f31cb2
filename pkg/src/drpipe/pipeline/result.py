"""Per-frame pipeline output."""

from __future__ import annotations

from dataclasses import dataclass

from ..compose import Placement
from ..core import Frame, InstanceMask, Pose6D, StageTimings


@dataclass(frozen=True)
class GateFlags:
    frame_passer_bypass: bool = False
    early_stop_reuse: bool = False
    keyframe: bool = False
    no_target: bool = False


@dataclass(frozen=True)
class PipelineResult:
    frame_id: int
    inpainted: Frame
    flags: GateFlags
    timings: StageTimings
    pose: Pose6D | None = None
    placement: Placement | None = None
    composed: Frame | None = None
    mask: InstanceMask | None = None
    silhouette: InstanceMask | None = None

    def __post_init__(self):
        if self.flags.early_stop_reuse and self.pose is None:
            raise ValueError("early_stop_reuse implies a pose")
        if self.flags.no_target and (self.pose is not None or self.placement is not None):
            raise ValueError("no_target implies pose and placement absent")
        if self.flags.frame_passer_bypass:
            if "segment" in self.timings or "inpaint" in self.timings:
                raise ValueError("bypass frames record no segment/inpaint timings")
