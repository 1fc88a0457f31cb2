"""Deterministic sequence generation with exact ground truth.

The object is rendered by the same rasterizer the live pipeline composes
with, so silhouettes, masks, and depth share one code path.
"""

from __future__ import annotations

import numpy as np

from ..compose import Placement, make_box_asset, render_asset
from ..core import Frame, InstanceMask, PinholeIntrinsics, Pose6D
from ..core.rand import derive_seed, make_rng
from ..errors import BehindCamera, InvalidConfig
from . import textures
from .bundle import SequenceBundle
from .config import BoxObject, SceneConfig

PLANE_Z_M = 10.0
CAPTURE_STEP_US = 33333  # 30 fps cadence


def project_point(intr: PinholeIntrinsics, p_cam) -> tuple[float, float]:
    x, y, z = (float(v) for v in p_cam)
    if z <= 0.0:
        raise BehindCamera(f"z = {z} <= 0")
    return (intr.fx * x / z + intr.cx, intr.fy * y / z + intr.cy)


def scene_box_asset(obj: BoxObject):
    return make_box_asset("scene_box", obj.extents, obj.face_colors)


def render_background(cfg: SceneConfig, cam_pose: Pose6D) -> tuple[np.ndarray, np.ndarray]:
    """Ray-cast the textured plane at world z = 10 m; returns (rgb, depth)."""
    h, w = cfg.height, cfg.width
    intr = cfg.intrinsics
    us = (np.arange(w, dtype=np.float64) - intr.cx) / intr.fx
    vs = (np.arange(h, dtype=np.float64) - intr.cy) / intr.fy
    xd, yd = np.meshgrid(us, vs)
    dirs_cam = np.stack([xd, yd, np.ones_like(xd)], axis=-1)

    rot = cam_pose.rotation_matrix()
    dirs_world = dirs_cam @ rot.T
    t = np.asarray(cam_pose.t)
    dz = dirs_world[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (PLANE_Z_M - t[2]) / dz
    hit = (dz > 0.0) & (s > 0.0)

    x = t[0] + s * dirs_world[..., 0]
    y = t[1] + s * dirs_world[..., 1]
    colors = textures.sample(cfg.background_kind, cfg.seed, x, y)
    pixels = np.where(hit[..., None], colors, 0).astype(np.uint8)
    depth = np.where(hit, s, np.inf).astype(np.float32)
    return pixels, depth


def generate_sequence(cfg: SceneConfig) -> SequenceBundle:
    if not isinstance(cfg, SceneConfig):
        raise InvalidConfig("expected a SceneConfig")
    asset = scene_box_asset(cfg.object)
    intr = cfg.intrinsics
    frames, masks, backgrounds, poses = [], [], [], []

    for i in range(cfg.frame_count):
        cam = cfg.camera_pose_at(i)
        obj_world = cfg.object_pose_at(i)
        gt_pose = cam.inverse().compose(obj_world)
        ts = i * CAPTURE_STEP_US

        bg_px, bg_depth = render_background(cfg, cam)
        base = Frame(i, ts, cfg.width, cfg.height, bg_px, intr, cam, depth=bg_depth)
        rendered, silhouette = render_asset(
            base, asset, Placement(pose=gt_pose, scale=1.0), intr
        )

        frame_px = rendered.pixels
        if cfg.pixel_noise > 0:
            rng = make_rng(derive_seed(cfg.seed, "pixel_noise", i))
            noise = rng.integers(
                -cfg.pixel_noise, cfg.pixel_noise + 1, size=(cfg.height, cfg.width, 3)
            ).astype(np.int16)
            frame_px = np.clip(frame_px.astype(np.int16) + noise, 0, 255).astype(np.uint8)
            bg_px = np.clip(bg_px.astype(np.int16) + noise, 0, 255).astype(np.uint8)

        frames.append(
            Frame(i, ts, cfg.width, cfg.height, frame_px, intr, cam, depth=rendered.depth)
        )
        backgrounds.append(Frame(i, ts, cfg.width, cfg.height, bg_px, intr, cam, depth=None))
        masks.append(silhouette)
        poses.append(gt_pose)

    return SequenceBundle(
        frames=frames,
        gt_masks=masks,
        gt_backgrounds=backgrounds,
        gt_poses=poses,
        symmetry_group=cfg.object.symmetry_group,
        seed=cfg.seed,
    )
