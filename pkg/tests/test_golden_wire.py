"""The checked-in wire fixtures are the cross-component protocol contract:
encoding the manifest's logical messages must reproduce the bytes exactly,
and decoding the bytes must reproduce the fields.
"""

import json
from pathlib import Path

import pytest

from drpipe.transport import (
    Bye,
    Control,
    ErrorMsg,
    FrameMsg,
    Hello,
    HelloAck,
    Metrics,
    ResultMsg,
    StreamDecoder,
    encode,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures" / "golden_wire"


def manifest_entries():
    manifest = json.loads((FIXTURES / "manifest.json").read_text())
    return [pytest.param(entry, id=entry["file"]) for entry in manifest]


def message_from_entry(entry):
    t = entry["type"]
    if t == "bye":
        return Bye()
    if t == "hello":
        return Hello(entry["proto_version"], entry["session_cfg_json"].encode())
    if t == "hello_ack":
        return HelloAck(entry["session_id"], entry["epoch_us"])
    if t == "control":
        return Control(entry["control_json"].encode())
    if t == "metrics":
        return Metrics(entry["report_json"].encode())
    if t == "error":
        return ErrorMsg(entry["code"], entry["detail"])
    if t in ("frame_rgb", "frame_rgbd"):
        return FrameMsg(
            entry["frame_id"], entry["capture_ts"], entry["width"], entry["height"],
            tuple(entry["intrinsics"]), tuple(entry["camera_pose"]),
            bytes.fromhex(entry["rgb_hex"]),
            None if entry["depth_hex"] is None else bytes.fromhex(entry["depth_hex"]),
        )
    if t in ("result_minimal", "result_full"):
        return ResultMsg(
            entry["frame_id"], entry["flags"], entry["width"], entry["height"],
            bytes.fromhex(entry["inpainted_hex"]),
            None if entry["pose"] is None else tuple(entry["pose"]),
            None if entry["placement"] is None else tuple(entry["placement"]),
            entry["timings"],
            None if entry["composed_hex"] is None else bytes.fromhex(entry["composed_hex"]),
        )
    raise AssertionError(f"unknown fixture type {t}")


@pytest.mark.parametrize("entry", manifest_entries())
def test_encode_matches_golden_bytes(entry):
    golden = (FIXTURES / entry["file"]).read_bytes()
    assert encode(message_from_entry(entry)) == golden


@pytest.mark.parametrize("entry", manifest_entries())
def test_decode_matches_manifest(entry):
    golden = (FIXTURES / entry["file"]).read_bytes()
    dec = StreamDecoder()
    out = dec.feed(golden)
    assert len(out) == 1 and not dec.issues
    assert out[0] == message_from_entry(entry)


def test_whole_stream_decodes_in_order():
    manifest = json.loads((FIXTURES / "manifest.json").read_text())
    blob = b"".join((FIXTURES / e["file"]).read_bytes() for e in manifest)
    dec = StreamDecoder()
    out = dec.feed(blob)
    assert [type(m).__name__ for m in out] == [
        "Bye", "Hello", "HelloAck", "Control", "Metrics", "ErrorMsg",
        "FrameMsg", "FrameMsg", "ResultMsg", "ResultMsg",
    ]
