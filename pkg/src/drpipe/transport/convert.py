"""Domain objects <-> wire messages, and the small JSON payloads."""

from __future__ import annotations

import json

import numpy as np

from ..compose import Placement
from ..core import Frame, PinholeIntrinsics, Pose6D
from ..errors import DrError
from .messages import (
    FLAG_BYPASS,
    FLAG_KEYFRAME,
    FLAG_NO_TARGET,
    FLAG_REUSE,
    Control,
    FrameMsg,
    Metrics,
    ResultMsg,
)

CONTROL_ACTIONS = ("select_object", "set_asset", "set_gating", "set_anchor", "get_metrics")


def pose_to_wire(p: Pose6D) -> tuple:
    return (*p.t, *p.q)


def wire_to_pose(values) -> Pose6D:
    return Pose6D(tuple(values[0:3]), tuple(values[3:7]))


def frame_to_msg(frame: Frame) -> FrameMsg:
    return FrameMsg(
        frame_id=frame.frame_id,
        capture_ts=frame.capture_ts,
        width=frame.width,
        height=frame.height,
        intrinsics=frame.intrinsics.as_tuple(),
        camera_pose=pose_to_wire(frame.camera_pose),
        rgb=frame.pixels.tobytes(),
        depth=None if frame.depth is None else frame.depth.astype("<f4").tobytes(),
    )


def msg_to_frame(msg: FrameMsg) -> Frame:
    pixels = np.frombuffer(msg.rgb, dtype=np.uint8).reshape(msg.height, msg.width, 3)
    depth = None
    if msg.depth is not None:
        depth = np.frombuffer(msg.depth, dtype="<f4").reshape(msg.height, msg.width)
    return Frame(
        frame_id=msg.frame_id,
        capture_ts=msg.capture_ts,
        width=msg.width,
        height=msg.height,
        pixels=pixels,
        intrinsics=PinholeIntrinsics(*msg.intrinsics),
        camera_pose=wire_to_pose(msg.camera_pose),
        depth=depth,
    )


def flags_to_wire(flags) -> int:
    bits = 0
    if flags.frame_passer_bypass:
        bits |= FLAG_BYPASS
    if flags.early_stop_reuse:
        bits |= FLAG_REUSE
    if flags.keyframe:
        bits |= FLAG_KEYFRAME
    if flags.no_target:
        bits |= FLAG_NO_TARGET
    return bits


def result_to_msg(result) -> ResultMsg:
    pose = None if result.pose is None else pose_to_wire(result.pose)
    placement = None
    if result.placement is not None:
        placement = (*pose_to_wire(result.placement.pose), result.placement.scale)
    return ResultMsg(
        frame_id=result.frame_id,
        flags=flags_to_wire(result.flags),
        width=result.inpainted.width,
        height=result.inpainted.height,
        inpainted_rgb=result.inpainted.pixels.tobytes(),
        pose=pose,
        placement=placement,
        timings=result.timings.as_dict(),
        composed_rgb=None if result.composed is None else result.composed.pixels.tobytes(),
    )


def msg_pose(msg: ResultMsg) -> Pose6D | None:
    return None if msg.pose is None else wire_to_pose(msg.pose)


def msg_placement(msg: ResultMsg) -> Placement | None:
    if msg.placement is None:
        return None
    return Placement(pose=wire_to_pose(msg.placement[:7]), scale=msg.placement[7])


def rgb_array(data: bytes, width: int, height: int) -> np.ndarray:
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3)


# -- JSON payloads ------------------------------------------------------


def make_control(action: dict) -> Control:
    return Control(json.dumps(action, sort_keys=True).encode("utf-8"))


def parse_control(msg: Control) -> dict:
    try:
        action = json.loads(msg.control_json.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DrError(f"control payload is not JSON: {exc}") from exc
    if not isinstance(action, dict) or action.get("action") not in CONTROL_ACTIONS:
        raise DrError(f"unknown control action {action!r}")
    kind = action["action"]
    if kind == "select_object" and not (
        isinstance(action.get("u"), int) and isinstance(action.get("v"), int)
    ):
        raise DrError("select_object needs integer u, v")
    if kind == "set_asset" and not isinstance(action.get("asset_id"), str):
        raise DrError("set_asset needs asset_id")
    if kind == "set_gating" and not (
        isinstance(action.get("frame_passer"), bool)
        and isinstance(action.get("early_stop"), bool)
    ):
        raise DrError("set_gating needs frame_passer and early_stop booleans")
    if kind == "set_anchor" and action.get("mode") not in ("fit_extent", "fixed_scale"):
        raise DrError("set_anchor needs mode fit_extent|fixed_scale")
    return action


def make_metrics(report: dict, session_id: int, window_frames: int) -> Metrics:
    payload = dict(report)
    payload["session_id"] = session_id
    payload["window_frames"] = window_frames
    return Metrics(json.dumps(payload, sort_keys=True).encode("utf-8"))


def parse_metrics(msg: Metrics) -> dict:
    try:
        report = json.loads(msg.report_json.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DrError(f"metrics payload is not JSON: {exc}") from exc
    if not isinstance(report, dict):
        raise DrError("metrics payload must be a JSON object")
    return report
