"""Sequence bundles: frames plus full ground truth, with lossless directory I/O.

Directory layout: frame_%05d.ppm, bg_%05d.ppm, mask_%05d.pgm, depth_%05d.dpt,
manifest.json.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core import Frame, InstanceMask, PinholeIntrinsics, Pose6D
from ..core import imageio
from ..errors import ManifestSchema

MANIFEST_VERSION = 1


@dataclass(frozen=True)
class SequenceBundle:
    frames: list[Frame]
    gt_masks: list[InstanceMask]
    gt_backgrounds: list[Frame]
    gt_poses: list[Pose6D]
    symmetry_group: tuple
    seed: int

    def __post_init__(self):
        n = len(self.frames)
        if n < 1:
            raise ValueError("bundle needs at least one frame")
        for name in ("gt_masks", "gt_backgrounds", "gt_poses"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length != frame count {n}")
        for f in self.frames:
            if f.depth is None:
                raise ValueError(f"frame {f.frame_id} missing depth plane")

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def intrinsics(self) -> PinholeIntrinsics:
        return self.frames[0].intrinsics


def _pose_json(p: Pose6D) -> dict:
    return {"t": list(p.t), "q": list(p.q)}


def manifest_dict(bundle: SequenceBundle) -> dict:
    return {
        "version": MANIFEST_VERSION,
        "width": bundle.width,
        "height": bundle.height,
        "frame_count": bundle.frame_count,
        "intrinsics": {
            "fx": bundle.intrinsics.fx,
            "fy": bundle.intrinsics.fy,
            "cx": bundle.intrinsics.cx,
            "cy": bundle.intrinsics.cy,
        },
        "poses": [_pose_json(p) for p in bundle.gt_poses],
        "camera_poses": [_pose_json(f.camera_pose) for f in bundle.frames],
        "symmetry": [list(s) for s in bundle.symmetry_group],
        "seed": bundle.seed,
        "capture_ts_us": [f.capture_ts for f in bundle.frames],
    }


def manifest_bytes(bundle: SequenceBundle) -> bytes:
    return json.dumps(manifest_dict(bundle), sort_keys=True, indent=1).encode("utf-8")


def bundle_hash(bundle: SequenceBundle) -> str:
    return hashlib.sha256(manifest_bytes(bundle)).hexdigest()


def write_bundle(bundle: SequenceBundle, dir_path) -> None:
    out = Path(dir_path)
    out.mkdir(parents=True, exist_ok=True)
    for i, (frame, bg, mask) in enumerate(
        zip(bundle.frames, bundle.gt_backgrounds, bundle.gt_masks)
    ):
        imageio.write_ppm(out / f"frame_{i:05d}.ppm", frame.pixels)
        imageio.write_ppm(out / f"bg_{i:05d}.ppm", bg.pixels)
        imageio.write_pgm16(out / f"mask_{i:05d}.pgm", mask.labels)
        imageio.write_depth(out / f"depth_{i:05d}.dpt", frame.depth)
    (out / "manifest.json").write_bytes(manifest_bytes(bundle))


def _load_manifest(dir_path: Path) -> dict:
    mpath = dir_path / "manifest.json"
    if not mpath.is_file():
        raise ManifestSchema(f"missing manifest.json in {dir_path}")
    try:
        man = json.loads(mpath.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ManifestSchema(f"manifest not valid JSON: {exc}") from exc
    if not isinstance(man, dict) or man.get("version") != MANIFEST_VERSION:
        raise ManifestSchema(f"unsupported manifest version {man.get('version')!r}")
    for key in ("width", "height", "frame_count", "intrinsics", "poses", "camera_poses",
                "symmetry", "seed"):
        if key not in man:
            raise ManifestSchema(f"manifest missing key {key!r}")
    n = man["frame_count"]
    if len(man["poses"]) != n:
        raise ManifestSchema(f"manifest has {len(man['poses'])} poses for {n} frames")
    if len(man["camera_poses"]) != n:
        raise ManifestSchema("camera_poses count != frame_count")
    return man


def read_bundle(dir_path) -> SequenceBundle:
    root = Path(dir_path)
    man = _load_manifest(root)
    n = man["frame_count"]
    w, h = man["width"], man["height"]
    try:
        intr = PinholeIntrinsics(**man["intrinsics"])
        poses = [Pose6D(tuple(p["t"]), tuple(p["q"])) for p in man["poses"]]
        cam_poses = [Pose6D(tuple(p["t"]), tuple(p["q"])) for p in man["camera_poses"]]
        symmetry = tuple(tuple(s) for s in man["symmetry"])
        ts = man.get("capture_ts_us", [i * 33333 for i in range(n)])
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestSchema(f"bad manifest field: {exc}") from exc

    frames, bgs, masks = [], [], []
    for i in range(n):
        try:
            px = imageio.read_ppm(root / f"frame_{i:05d}.ppm")
            bg_px = imageio.read_ppm(root / f"bg_{i:05d}.ppm")
            labels = imageio.read_pgm16(root / f"mask_{i:05d}.pgm")
            depth = imageio.read_depth(root / f"depth_{i:05d}.dpt")
        except FileNotFoundError as exc:
            raise ManifestSchema(f"bundle file missing: {exc.filename}") from exc
        if px.shape != (h, w, 3):
            raise ManifestSchema(f"frame {i} is {px.shape[1]}x{px.shape[0]}, manifest says {w}x{h}")
        frames.append(Frame(i, int(ts[i]), w, h, px, intr, cam_poses[i], depth=depth))
        bgs.append(Frame(i, int(ts[i]), w, h, bg_px, intr, cam_poses[i], depth=None))
        masks.append(InstanceMask(w, h, labels))

    return SequenceBundle(
        frames=frames,
        gt_masks=masks,
        gt_backgrounds=bgs,
        gt_poses=poses,
        symmetry_group=symmetry,
        seed=int(man["seed"]),
    )


def prepend_background_warmup(bundle: SequenceBundle) -> SequenceBundle:
    """New bundle whose frame 0 is the scene without the object.

    Models a camera that observed the scene before the target appeared —
    the only way a background cache can honestly hold the pixels the
    object occludes. Frame ids and timestamps are re-stamped to stay
    monotonic.
    """
    step = (
        bundle.frames[1].capture_ts - bundle.frames[0].capture_ts
        if bundle.frame_count > 1 else 33333
    )
    bg0 = bundle.gt_backgrounds[0]
    first = bundle.frames[0]
    # object pixels take the plane depth (the farthest surface in the scene)
    masked = bundle.gt_masks[0].labels != 0
    plane_depth = first.depth[~masked].max() if (~masked).any() else np.float32(10.0)
    warmup_depth = np.where(masked, plane_depth, first.depth).astype(np.float32)
    warmup = Frame(
        0, 0, bundle.width, bundle.height, bg0.pixels, bundle.intrinsics,
        first.camera_pose, depth=warmup_depth,
    )
    warmup_bg = Frame(
        0, 0, bundle.width, bundle.height, bg0.pixels, bundle.intrinsics,
        first.camera_pose, depth=None,
    )

    def restamp(f: Frame, i: int, with_depth: bool) -> Frame:
        return dataclasses.replace(f, frame_id=i, capture_ts=i * step)

    frames = [warmup] + [restamp(f, i + 1, True) for i, f in enumerate(bundle.frames)]
    bgs = [warmup_bg] + [restamp(f, i + 1, False) for i, f in enumerate(bundle.gt_backgrounds)]
    masks = [InstanceMask.empty(bundle.width, bundle.height)] + list(bundle.gt_masks)
    poses = [bundle.gt_poses[0]] + list(bundle.gt_poses)
    return SequenceBundle(
        frames=frames,
        gt_masks=masks,
        gt_backgrounds=bgs,
        gt_poses=poses,
        symmetry_group=bundle.symmetry_group,
        seed=bundle.seed,
    )
