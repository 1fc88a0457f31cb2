from .inpaint import Converged, Fast, HarmonicInpainter, inpaint
from .pose import DepthPcaPoseEstimator, back_project, pose_coarse, pose_refine
from .segment import ChromaKeySegmenter, chroma_match, label_components, segment
from .target import (
    CHROMA_KEY,
    INSTANCE_ID,
    BackendSet,
    PoseFeatures,
    TargetSpec,
    default_backends,
)

__all__ = [
    "Converged",
    "Fast",
    "HarmonicInpainter",
    "inpaint",
    "DepthPcaPoseEstimator",
    "back_project",
    "pose_coarse",
    "pose_refine",
    "ChromaKeySegmenter",
    "chroma_match",
    "label_components",
    "segment",
    "CHROMA_KEY",
    "INSTANCE_ID",
    "BackendSet",
    "PoseFeatures",
    "TargetSpec",
    "default_backends",
]
