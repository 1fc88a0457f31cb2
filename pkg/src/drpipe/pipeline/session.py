"""Per-session orchestrator: the 2D and 3D branches, gates, and the merge barrier."""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from ..compose import AnchorPolicy, AssetStore, map_pose, render_asset
from ..core import Frame, InstanceMask, StageClock, StageTimings
from ..errors import (
    DrError,
    NoInstanceAtPoint,
    OutOfOrderFrame,
    StageFailure,
)
from ..gating import (
    BackgroundCache,
    Bypass2D,
    Reuse3D,
    cache_note_bypass,
    cache_update,
    early_stop_decide,
    frame_passer_decide,
    predict_region,
)
from ..perception import Fast, default_backends
from .config import SERVER, SessionConfig
from .result import GateFlags, PipelineResult

SEQUENTIAL = "sequential"
THREADED = "threaded"


class Session:
    """One processing lane. Frames are handled one at a time; within a frame
    the 2D fill and the 3D pose branch may run on separate threads and join
    at the merge barrier. Control mutations apply between frames.
    """

    def __init__(
        self,
        cfg: SessionConfig,
        backends=None,
        asset_store: AssetStore | None = None,
        branch_mode: str = SEQUENTIAL,
    ):
        if branch_mode not in (SEQUENTIAL, THREADED):
            raise ValueError(f"branch_mode must be sequential|threaded, got {branch_mode!r}")
        self._lock = threading.Lock()
        self.cfg = cfg
        self.backends = backends or default_backends()
        self.assets = asset_store or AssetStore()
        self.asset = self.assets.get(cfg.asset_id)
        self.tracked = cfg.tracked_instance()
        self.cache: BackgroundCache | None = None
        self.prev_mask: InstanceMask | None = None
        self.prev_features = None
        self.prev_pose = None
        self.last_emitted = -1
        self._executor = ThreadPoolExecutor(max_workers=2) if branch_mode == THREADED else None

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=False)

    # -- control surface -------------------------------------------------

    def apply_control(self, action: dict) -> None:
        """Mutate session config atomically between frames."""
        kind = action.get("action")
        with self._lock:
            if kind == "select_object":
                u, v = int(action["u"]), int(action["v"])
                mask = self.prev_mask
                if mask is None or not (0 <= v < mask.height and 0 <= u < mask.width):
                    raise NoInstanceAtPoint("no instance at point")
                label = int(mask.labels[v, u])
                if label == 0:
                    raise NoInstanceAtPoint("no instance at point")
                self.tracked = label
            elif kind == "set_asset":
                asset = self.assets.get(str(action["asset_id"]))
                self.asset = asset
                self.cfg = replace(self.cfg, asset_id=asset.asset_id)
            elif kind == "set_gating":
                self.cfg = replace(
                    self.cfg,
                    gating=replace(
                        self.cfg.gating,
                        frame_passer_enabled=bool(action["frame_passer"]),
                        early_stop_enabled=bool(action["early_stop"]),
                    ),
                )
            elif kind == "set_anchor":
                anchor = AnchorPolicy(
                    mode=action["mode"],
                    scale=float(action.get("scale", 1.0)),
                    align=action.get("align", self.cfg.anchor.align),
                )
                self.cfg = replace(self.cfg, anchor=anchor)
            else:
                raise DrError(f"unknown control action {kind!r}")

    # -- frame processing -------------------------------------------------

    def process_frame(self, frame: Frame) -> PipelineResult:
        with self._lock:
            cfg = self.cfg
            tracked = self.tracked
            asset = self.asset
        if frame.frame_id <= self.last_emitted:
            raise OutOfOrderFrame(
                f"frame {frame.frame_id} after emitted {self.last_emitted}"
            )
        if self.cache is None or (self.cache.width, self.cache.height) != (
            frame.width, frame.height
        ):
            self.cache = BackgroundCache(frame.width, frame.height, cfg.gating.tile_px)

        clock = StageClock()
        with clock.measure("total"):
            result = self._run_frame(frame, cfg, tracked, asset, clock)
        timings = clock.finish()
        result = replace(result, timings=timings)
        self.last_emitted = frame.frame_id
        return result

    def _run_frame(self, frame, cfg, tracked, asset, clock) -> PipelineResult:
        gating = cfg.gating
        cache = self.cache

        # ---- 2D gate
        with clock.measure("gate2d"):
            region = None
            if (
                gating.frame_passer_enabled
                and tracked >= 1
                and self.prev_mask is not None
                and self.prev_mask.has_instance(tracked)
            ):
                region = _stage("gate2d", predict_region, self.prev_mask, tracked,
                                gating.region_dilation_px)
            keyframe = bool(
                gating.frame_passer_enabled
                and region is not None
                and cache.frames_since_keyframe >= gating.keyframe_interval
            )
            decision = _stage(
                "gate2d", frame_passer_decide, cache, gating, frame.camera_pose, region
            )

        bypass = isinstance(decision, Bypass2D)
        seg_mask: InstanceMask | None
        no_target = False

        if bypass:
            with clock.measure("gate2d"):
                px = frame.pixels.copy()
                px[decision.region.slices()] = decision.patch
                inpainted = frame.with_pixels(px)
                cache_note_bypass(cache)
            seg_mask = self.prev_mask
            mask3d = self.prev_mask
            run_2d = None
        else:
            with clock.measure("segment"):
                seg_mask = _stage("segment", self.backends.segmenter.segment, frame, cfg.target)
            target_present = tracked >= 1 and seg_mask.has_instance(tracked)
            mask3d = seg_mask

            def run_2d() -> Frame:
                with clock.measure("gate2d"):
                    _stage("gate2d", cache_update, cache, gating, frame, seg_mask,
                           frame.camera_pose)
                if not target_present:
                    return frame
                hole = InstanceMask.from_bool(seg_mask.labels == tracked)
                with clock.measure("inpaint"):
                    return _stage(
                        "inpaint", self.backends.inpainter.inpaint, frame, hole, Fast()
                    )

            if not target_present:
                no_target = True

        if no_target:
            inpainted = run_2d()
            self.prev_mask = seg_mask
            self.prev_features = None
            self.prev_pose = None
            return PipelineResult(
                frame_id=frame.frame_id,
                inpainted=inpainted,
                flags=GateFlags(keyframe=keyframe, no_target=True),
                timings=_EMPTY_TIMINGS,
                mask=seg_mask,
            )

        # ---- 3D branch, concurrent with the 2D fill
        def run_3d():
            with clock.measure("pose_coarse"):
                feats = _stage(
                    "pose_coarse", self.backends.pose_estimator.pose_coarse,
                    frame, mask3d, tracked,
                )
            with clock.measure("gate3d"):
                decision3 = _stage(
                    "gate3d", early_stop_decide,
                    self.prev_features, feats, self.prev_pose, gating,
                )
            if isinstance(decision3, Reuse3D):
                return feats, decision3.prev_pose, True
            with clock.measure("pose_refine"):
                pose = _stage(
                    "pose_refine", self.backends.pose_estimator.pose_refine,
                    feats, frame, mask3d, tracked,
                )
            return feats, pose, False

        if self._executor is not None and run_2d is not None:
            fut2 = self._executor.submit(run_2d)
            feats, pose, reused = run_3d()
            inpainted = fut2.result()
        else:
            if run_2d is not None:
                inpainted = run_2d()
            feats, pose, reused = run_3d()

        # ---- merge barrier
        with clock.measure("compose"):
            placement = _stage("compose", map_pose, pose, feats.extent_cam, asset, cfg.anchor)
            composed = None
            silhouette = None
            if cfg.compose_location == SERVER:
                composed, silhouette = _stage(
                    "compose", render_asset, inpainted, asset, placement, frame.intrinsics
                )

        self.prev_mask = seg_mask
        self.prev_features = feats
        self.prev_pose = pose

        return PipelineResult(
            frame_id=frame.frame_id,
            inpainted=inpainted,
            flags=GateFlags(
                frame_passer_bypass=bypass,
                early_stop_reuse=reused,
                keyframe=keyframe,
                no_target=False,
            ),
            timings=_EMPTY_TIMINGS,
            pose=pose,
            placement=placement,
            composed=composed,
            mask=seg_mask,
            silhouette=silhouette,
        )


_EMPTY_TIMINGS = StageTimings()


def _stage(name: str, fn, *args):
    try:
        return fn(*args)
    except StageFailure:
        raise
    except DrError as exc:
        raise StageFailure(name, exc) from exc
