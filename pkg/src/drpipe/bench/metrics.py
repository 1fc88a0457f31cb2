"""Scene-quality metrics against scenegen ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import InstanceMask, quat_geodesic_deg
from ..core import quat as _q
from ..core.timing import percentile
from ..errors import DimMismatch, EmptyRegion, Misaligned
from ..scenegen import SequenceBundle, bundle_hash

METRIC_NAMES = (
    "inpaint_psnr_db",
    "mask_iou",
    "pose_t_err_m",
    "pose_r_err_deg",
    "temporal_flicker",
    "silhouette_iou",
)


def _pixels(image) -> np.ndarray:
    return image.pixels if hasattr(image, "pixels") else np.asarray(image)


def psnr_region(a, b, region: InstanceMask) -> float | None:
    """PSNR over labeled region pixels, all channels; None encodes infinite."""
    pa, pb = _pixels(a), _pixels(b)
    if pa.shape != pb.shape:
        raise DimMismatch(f"{pa.shape} vs {pb.shape}")
    if (region.height, region.width) != pa.shape[:2]:
        raise DimMismatch("region does not match image dimensions")
    sel = region.labels != 0
    if not sel.any():
        raise EmptyRegion("region has no pixels")
    diff = pa[sel].astype(np.float64) - pb[sel].astype(np.float64)
    mse = float((diff * diff).mean())
    if mse == 0.0:
        return None
    return 10.0 * math.log10(255.0 * 255.0 / mse)


def mask_iou(a: InstanceMask, b: InstanceMask, label_a: int = 1, label_b: int = 1) -> float:
    if (a.width, a.height) != (b.width, b.height):
        raise DimMismatch(f"{a.width}x{a.height} vs {b.width}x{b.height}")
    sa = a.labels == label_a
    sb = b.labels == label_b
    union = int(np.count_nonzero(sa | sb))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(sa & sb)) / union


@dataclass
class QualityReport:
    bundle_hash: str
    frames: int
    dropped: int
    per_frame: dict = field(default_factory=dict)
    aggregates: dict = field(default_factory=dict)
    rates: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "bundle_hash": self.bundle_hash,
            "frames": self.frames,
            "dropped": self.dropped,
            "metrics": self.aggregates,
            "rates": self.rates,
        }


def _aggregate(values: list) -> dict | None:
    defined = [v for v in values if v is not None]
    if not defined:
        return None
    return {
        "mean": float(sum(defined) / len(defined)),
        "p50": float(percentile(defined, 50)),
        "p95": float(percentile(defined, 95)),
    }


def evaluate(results, bundle: SequenceBundle) -> QualityReport:
    """Score aligned results; undefined per-frame values stay None and are
    excluded from aggregates."""
    if not results:
        raise Misaligned("no results to evaluate")
    per: dict[str, list] = {name: [] for name in METRIC_NAMES}
    prev_inpainted = None
    prev_mask_bg = None
    seen = -1
    for r in results:
        i = r.frame_id
        if i <= seen:
            raise Misaligned(f"result frame_ids not strictly increasing at {i}")
        if i >= bundle.frame_count:
            raise Misaligned(f"result frame_id {i} outside bundle of {bundle.frame_count}")
        seen = i
        gt_mask = bundle.gt_masks[i]
        gt_bg = bundle.gt_backgrounds[i]
        gt_pose = bundle.gt_poses[i]
        inpainted = getattr(r, "inpainted", None)
        if inpainted is None:
            inpainted = getattr(r, "inpainted_pixels", None)

        if inpainted is not None and gt_mask.instance_count > 0:
            per["inpaint_psnr_db"].append(psnr_region(inpainted, gt_bg, gt_mask))
        else:
            per["inpaint_psnr_db"].append(None)

        mask = getattr(r, "mask", None)
        per["mask_iou"].append(None if mask is None else mask_iou(mask, gt_mask))

        if r.pose is not None:
            per["pose_t_err_m"].append(float(math.dist(r.pose.t, gt_pose.t)))
            per["pose_r_err_deg"].append(
                min(
                    quat_geodesic_deg(r.pose.q, _q.mul(gt_pose.q, s))
                    for s in bundle.symmetry_group
                )
            )
        else:
            per["pose_t_err_m"].append(None)
            per["pose_r_err_deg"].append(None)

        bg_sel = gt_mask.labels == 0
        if inpainted is not None and prev_inpainted is not None:
            static = bg_sel & prev_mask_bg
            if static.any():
                diff = np.abs(
                    _pixels(inpainted)[static].astype(np.float64)
                    - _pixels(prev_inpainted)[static].astype(np.float64)
                )
                per["temporal_flicker"].append(float(diff.mean()))
            else:
                per["temporal_flicker"].append(None)
        else:
            per["temporal_flicker"].append(None)
        prev_inpainted = inpainted
        prev_mask_bg = bg_sel

        sil = getattr(r, "silhouette", None)
        per["silhouette_iou"].append(None if sil is None else mask_iou(sil, gt_mask))

    dropped = bundle.frame_count - len(results)
    aggregates = {}
    for name, values in per.items():
        agg = _aggregate(values)
        if agg is not None:
            aggregates[name] = agg
    bypass = sum(1 for r in results if r.flags.frame_passer_bypass)
    reuse = sum(1 for r in results if r.flags.early_stop_reuse)
    rates = {
        "bypass": bypass / len(results),
        "reuse": reuse / len(results),
        "drop": dropped / bundle.frame_count,
    }
    return QualityReport(
        bundle_hash=bundle_hash(bundle),
        frames=len(results),
        dropped=dropped,
        per_frame=per,
        aggregates=aggregates,
        rates=rates,
    )
