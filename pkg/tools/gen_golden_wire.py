"""Generate the golden wire fixtures shared by the Python and viewer test suites.

Each fixture is one encoded WireFrame (NN_name.bin) plus a language-neutral
description in manifest.json from which any implementation can re-encode the
same bytes.

Usage: python tools/gen_golden_wire.py [fixtures/golden_wire]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from drpipe import PROTO_VERSION
from drpipe.core import f32
from drpipe.transport import (
    Bye,
    Control,
    ErrorMsg,
    FrameMsg,
    Hello,
    HelloAck,
    Metrics,
    ResultMsg,
    encode,
)


def build_fixtures():
    rgb = bytes(range(4 * 3 * 3))  # 4x3 frame
    depth = b"".join(
        __import__("struct").pack("<f", 0.5 + 0.25 * i) for i in range(4 * 3)
    )
    intr = tuple(f32(v) for v in (300.0, 300.0, 160.0, 120.0))
    cam = tuple(f32(v) for v in (0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0))
    pose = tuple(f32(v) for v in (0.125, -0.5, 2.0, 0.980580675601959, 0.0, 0.19611613452434540, 0.0))
    placement = pose + (f32(0.30000001192092896),)
    session_cfg = json.dumps({"asset_id": "box", "compose_location": "server"}, sort_keys=True)
    control = json.dumps({"action": "select_object", "u": 160, "v": 120}, sort_keys=True)
    metrics = json.dumps({"frames": 30, "session_id": 1, "window_frames": 30}, sort_keys=True)
    inpainted = bytes((i * 7) % 256 for i in range(4 * 3 * 3))
    composed = bytes((i * 11) % 256 for i in range(4 * 3 * 3))
    timings = {"gate2d": 120, "segment": 9000, "total": 21000}

    return [
        ("bye", Bye(), {}),
        ("hello", Hello(PROTO_VERSION, session_cfg.encode()),
         {"proto_version": PROTO_VERSION, "session_cfg_json": session_cfg}),
        ("hello_ack", HelloAck(7, 1722222222000000),
         {"session_id": 7, "epoch_us": 1722222222000000}),
        ("control", Control(control.encode()), {"control_json": control}),
        ("metrics", Metrics(metrics.encode()), {"report_json": metrics}),
        ("error", ErrorMsg(1000, "unsupported proto 9"),
         {"code": 1000, "detail": "unsupported proto 9"}),
        ("frame_rgb", FrameMsg(5, 166665, 4, 3, intr, cam, rgb, None),
         {"frame_id": 5, "capture_ts": 166665, "width": 4, "height": 3,
          "intrinsics": list(intr), "camera_pose": list(cam),
          "rgb_hex": rgb.hex(), "depth_hex": None}),
        ("frame_rgbd", FrameMsg(6, 199998, 4, 3, intr, cam, rgb, depth),
         {"frame_id": 6, "capture_ts": 199998, "width": 4, "height": 3,
          "intrinsics": list(intr), "camera_pose": list(cam),
          "rgb_hex": rgb.hex(), "depth_hex": depth.hex()}),
        ("result_minimal", ResultMsg(9, 0x08, 4, 3, inpainted),
         {"frame_id": 9, "flags": 8, "width": 4, "height": 3,
          "pose": None, "placement": None, "timings": {},
          "inpainted_hex": inpainted.hex(), "composed_hex": None}),
        ("result_full",
         ResultMsg(10, 0x03, 4, 3, inpainted, pose, placement, timings, composed),
         {"frame_id": 10, "flags": 3, "width": 4, "height": 3,
          "pose": list(pose), "placement": list(placement), "timings": timings,
          "inpainted_hex": inpainted.hex(), "composed_hex": composed.hex()}),
    ]


def main() -> int:
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "fixtures/golden_wire")
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for i, (name, msg, fields) in enumerate(build_fixtures()):
        data = encode(msg)
        fname = f"{i:02d}_{name}.bin"
        (out / fname).write_bytes(data)
        manifest.append({"file": fname, "type": name, **fields})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1), encoding="utf-8")
    print(f"wrote {len(manifest)} fixtures to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
