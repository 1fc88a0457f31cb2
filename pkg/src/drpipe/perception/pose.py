"""Staged pose estimation from masked depth: cheap features, then PCA refinement."""

from __future__ import annotations

import numpy as np

from ..core import Frame, InstanceMask, Pose6D
from ..core import quat
from ..errors import DegenerateDepth, DegenerateGeometry, EmptyInstance, NoDepth
from .target import PoseFeatures

CONFIDENCE_SOFT_PX = 64
_RANK_EPS = 1e-12


def back_project(frame: Frame, mask: InstanceMask, instance: int) -> np.ndarray:
    """Masked pixels -> (N, 3) camera-space points via the inverse pinhole."""
    if frame.depth is None:
        raise NoDepth("frame carries no depth plane")
    if (mask.width, mask.height) != (frame.width, frame.height):
        raise EmptyInstance(f"mask dims {mask.width}x{mask.height} do not match frame")
    rows, cols = np.nonzero(mask.labels == instance)
    if rows.size == 0:
        raise EmptyInstance(f"instance {instance} not present")
    d = frame.depth[rows, cols].astype(np.float64)
    valid = np.isfinite(d) & (d > 0)
    if not valid.any():
        raise DegenerateDepth("every masked pixel has non-finite or non-positive depth")
    rows, cols, d = rows[valid], cols[valid], d[valid]
    intr = frame.intrinsics
    x = (cols.astype(np.float64) - intr.cx) * d / intr.fx
    y = (rows.astype(np.float64) - intr.cy) * d / intr.fy
    return np.stack([x, y, d], axis=1)


def pose_coarse(frame: Frame, mask: InstanceMask, instance: int) -> PoseFeatures:
    pts = back_project(frame, mask, instance)
    centroid = pts.mean(axis=0)
    extent = pts.max(axis=0) - pts.min(axis=0)
    return PoseFeatures(
        centroid_cam=tuple(centroid),
        extent_cam=tuple(extent),
        mask_area_px=int(pts.shape[0]),
    )


def pose_refine(
    features: PoseFeatures, frame: Frame, mask: InstanceMask, instance: int
) -> Pose6D:
    pts = back_project(frame, mask, instance)
    if pts.shape[0] < 3:
        raise DegenerateGeometry(f"{pts.shape[0]} points cannot fix an orientation")
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered / pts.shape[0]
    eigvals, eigvecs = np.linalg.eigh(cov)
    eigvals = eigvals[::-1]
    rot = eigvecs[:, ::-1].copy()
    if eigvals[1] <= _RANK_EPS * max(eigvals[0], _RANK_EPS):
        raise DegenerateGeometry("points are collinear (zero spread on two axes)")
    # deterministic sign: each principal axis points along its camera axis
    for i in range(2):
        if rot[i, i] < 0:
            rot[:, i] = -rot[:, i]
    rot[:, 2] = np.cross(rot[:, 0], rot[:, 1])
    q = quat.from_matrix(rot)
    area = features.mask_area_px
    return Pose6D(
        t=features.centroid_cam,
        q=q,
        confidence=area / (area + CONFIDENCE_SOFT_PX),
    )


class DepthPcaPoseEstimator:
    def pose_coarse(self, frame, mask, instance):
        return pose_coarse(frame, mask, instance)

    def pose_refine(self, features, frame, mask, instance):
        return pose_refine(features, frame, mask, instance)
