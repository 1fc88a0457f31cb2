from .types import (
    Frame,
    InstanceMask,
    PinholeIntrinsics,
    Pose6D,
    IDENTITY_POSE,
    f32,
)
from .timing import LatencyBudget, StageTimings, StageClock, budget_for_fps, percentile, STAGES
from .quat import geodesic_deg as quat_geodesic_deg
from .rand import make_rng, derive_seed

__all__ = [
    "Frame",
    "InstanceMask",
    "PinholeIntrinsics",
    "Pose6D",
    "IDENTITY_POSE",
    "f32",
    "LatencyBudget",
    "StageTimings",
    "StageClock",
    "budget_for_fps",
    "percentile",
    "STAGES",
    "quat_geodesic_deg",
    "make_rng",
    "derive_seed",
]
