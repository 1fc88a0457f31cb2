"""Results directory: per-frame rasters plus results.json and report.json.

Written by the client and the offline harness; read back by drbench.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..compose import Placement
from ..core import InstanceMask, Pose6D, StageTimings
from ..core import imageio
from .result import GateFlags


@dataclass
class ResultRecord:
    """What bench needs from one frame; rasters may be absent for wire results."""

    frame_id: int
    flags: GateFlags
    timings: StageTimings
    pose: Pose6D | None = None
    placement: Placement | None = None
    inpainted_pixels: np.ndarray | None = None
    composed_pixels: np.ndarray | None = None
    mask: InstanceMask | None = None
    silhouette: InstanceMask | None = None
    rtt_us: int | None = None


def record_from_result(r) -> ResultRecord:
    return ResultRecord(
        frame_id=r.frame_id,
        flags=r.flags,
        timings=r.timings,
        pose=r.pose,
        placement=r.placement,
        inpainted_pixels=None if r.inpainted is None else r.inpainted.pixels,
        composed_pixels=None if r.composed is None else r.composed.pixels,
        mask=r.mask,
        silhouette=r.silhouette,
    )


def _pose_json(p: Pose6D | None):
    if p is None:
        return None
    return {"t": list(p.t), "q": list(p.q), "confidence": p.confidence}


def _pose_from(d) -> Pose6D | None:
    if d is None:
        return None
    return Pose6D(tuple(d["t"]), tuple(d["q"]), d.get("confidence", 1.0))


def write_results_dir(dir_path, results, report: dict, extra_report: dict | None = None) -> None:
    out = Path(dir_path)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for r in results:
        rec = r if isinstance(r, ResultRecord) else record_from_result(r)
        i = rec.frame_id
        if rec.inpainted_pixels is not None:
            imageio.write_ppm(out / f"inpainted_{i:05d}.ppm", rec.inpainted_pixels)
        if rec.composed_pixels is not None:
            imageio.write_ppm(out / f"composed_{i:05d}.ppm", rec.composed_pixels)
        if rec.mask is not None:
            imageio.write_pgm16(out / f"mask_{i:05d}.pgm", rec.mask.labels)
        if rec.silhouette is not None:
            imageio.write_pgm16(out / f"silhouette_{i:05d}.pgm", rec.silhouette.labels)
        records.append(
            {
                "frame_id": i,
                "flags": {
                    "frame_passer_bypass": rec.flags.frame_passer_bypass,
                    "early_stop_reuse": rec.flags.early_stop_reuse,
                    "keyframe": rec.flags.keyframe,
                    "no_target": rec.flags.no_target,
                },
                "pose": _pose_json(rec.pose),
                "placement": (
                    None
                    if rec.placement is None
                    else {"pose": _pose_json(rec.placement.pose), "scale": rec.placement.scale}
                ),
                "timings": rec.timings.as_dict(),
                "rtt_us": rec.rtt_us,
            }
        )
    (out / "results.json").write_text(json.dumps(records, indent=1), encoding="utf-8")
    full_report = dict(report)
    if extra_report:
        full_report.update(extra_report)
    (out / "report.json").write_text(json.dumps(full_report, indent=1), encoding="utf-8")


def read_results_dir(dir_path) -> tuple[list[ResultRecord], dict]:
    root = Path(dir_path)
    records_json = json.loads((root / "results.json").read_text(encoding="utf-8"))
    report = json.loads((root / "report.json").read_text(encoding="utf-8"))
    records = []
    for d in records_json:
        i = d["frame_id"]
        flags = GateFlags(**d["flags"])
        placement = None
        if d["placement"] is not None:
            placement = Placement(
                pose=_pose_from(d["placement"]["pose"]), scale=d["placement"]["scale"]
            )

        def _maybe_ppm(name):
            p = root / name
            return imageio.read_ppm(p) if p.is_file() else None

        def _maybe_mask(name):
            p = root / name
            if not p.is_file():
                return None
            labels = imageio.read_pgm16(p)
            return InstanceMask(labels.shape[1], labels.shape[0], labels)

        records.append(
            ResultRecord(
                frame_id=i,
                flags=flags,
                timings=StageTimings(d.get("timings", {})),
                pose=_pose_from(d["pose"]),
                placement=placement,
                inpainted_pixels=_maybe_ppm(f"inpainted_{i:05d}.ppm"),
                composed_pixels=_maybe_ppm(f"composed_{i:05d}.ppm"),
                mask=_maybe_mask(f"mask_{i:05d}.pgm"),
                silhouette=_maybe_mask(f"silhouette_{i:05d}.pgm"),
                rtt_us=d.get("rtt_us"),
            )
        )
    return records, report
