import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drpipe.core import f32
from drpipe.errors import NonFiniteFloat, OversizedPayload
from drpipe.transport import (
    MAGIC,
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
    frame_to_msg,
    msg_to_frame,
    parse_control,
    make_control,
)

from conftest import make_frame
from oracles import crc32_bitwise


def rand_result(rng: random.Random, w=4, h=3) -> ResultMsg:
    pose = None
    placement = None
    if rng.random() < 0.7:
        pose = tuple(f32(rng.uniform(-5, 5)) for _ in range(7))
    if rng.random() < 0.5:
        placement = tuple(f32(rng.uniform(-5, 5)) for _ in range(7)) + (f32(rng.uniform(0.01, 3)),)
    stages = ["gate2d", "segment", "inpaint", "gate3d", "pose_coarse", "total"]
    timings = {s: rng.randrange(0, 10**7) for s in rng.sample(stages, rng.randrange(0, 4))}
    composed = rng.getrandbits(1) == 1
    return ResultMsg(
        frame_id=rng.randrange(0, 2**32),
        flags=rng.randrange(0, 16),
        width=w,
        height=h,
        inpainted_rgb=rng.randbytes(w * h * 3),
        pose=pose,
        placement=placement,
        timings=timings,
        composed_rgb=rng.randbytes(w * h * 3) if composed else None,
    )


def rand_frame_msg(rng: random.Random, w=4, h=3) -> FrameMsg:
    has_depth = rng.getrandbits(1) == 1
    return FrameMsg(
        frame_id=rng.randrange(0, 2**48),
        capture_ts=rng.randrange(0, 2**48),
        width=w,
        height=h,
        intrinsics=tuple(f32(rng.uniform(0.1, 500)) for _ in range(4)),
        camera_pose=tuple(f32(rng.uniform(-3, 3)) for _ in range(7)),
        rgb=rng.randbytes(w * h * 3),
        depth=rng.randbytes(w * h * 4) if has_depth else None,
    )


def rand_message(rng: random.Random):
    kind = rng.randrange(8)
    if kind == 0:
        return Hello(rng.randrange(0, 2**16), rng.randbytes(rng.randrange(0, 64)))
    if kind == 1:
        return HelloAck(rng.randrange(0, 2**64), rng.randrange(0, 2**64))
    if kind == 2:
        return rand_frame_msg(rng)
    if kind == 3:
        return rand_result(rng)
    if kind == 4:
        return Control(rng.randbytes(rng.randrange(0, 48)))
    if kind == 5:
        return Metrics(rng.randbytes(rng.randrange(0, 48)))
    if kind == 6:
        return ErrorMsg(rng.randrange(0, 2**16), "detail-" + str(rng.random()))
    return Bye()


# -- framing -------------------------------------------------------------


def test_bye_golden_bytes():
    data = encode(Bye())
    assert data[:4] == b"\x44\x52\x4d\x31"
    assert data[4] == 8
    assert data[5:9] == b"\x00\x00\x00\x00"
    crc = crc32_bitwise(bytes([8, 0, 0, 0, 0]))
    assert data[9:13] == crc.to_bytes(4, "little")
    assert len(data) == 13


def test_crc_matches_independent_implementation():
    rng = random.Random(7)
    for _ in range(50):
        msg = rand_message(rng)
        data = encode(msg)
        body = data[4:-4]
        assert data[-4:] == crc32_bitwise(body).to_bytes(4, "little")


def test_encoded_size_formula():
    rng = random.Random(8)
    for _ in range(100):
        msg = rand_message(rng)
        data = encode(msg)
        payload_len = int.from_bytes(data[5:9], "little")
        assert len(data) == 13 + payload_len


def test_round_trip_random_messages():
    rng = random.Random(9)
    dec = StreamDecoder()
    msgs = [rand_message(rng) for _ in range(2000)]
    out = dec.feed(b"".join(encode(m) for m in msgs))
    assert out == msgs
    assert dec.issues == []


def test_frame_msg_round_trip_through_domain():
    rng = np.random.default_rng(10)
    px = rng.integers(0, 256, size=(6, 5, 3), dtype=np.uint8)
    depth = rng.random((6, 5), dtype=np.float32)
    frame = make_frame(px, depth=depth, frame_id=12, ts=777)
    back = msg_to_frame(frame_to_msg(frame))
    assert back == frame


def test_bad_rgb_length_rejected_at_construction():
    with pytest.raises(ValueError):
        FrameMsg(0, 0, 4, 4, (1, 1, 0, 0), (0, 0, 0, 1, 0, 0, 0), b"\x00" * 10)


def test_non_finite_floats_rejected():
    with pytest.raises(NonFiniteFloat):
        FrameMsg(0, 0, 1, 1, (float("nan"), 1, 0, 0), (0, 0, 0, 1, 0, 0, 0), bytes(3))


def test_result_flags_high_bits_rejected():
    with pytest.raises(ValueError):
        ResultMsg(0, 0x10, 1, 1, bytes(3))


def test_oversized_payload_rejected():
    with pytest.raises(OversizedPayload):
        encode(Control(bytes(64 * 1024 * 1024 + 1)))


# -- streaming decoder ----------------------------------------------------


def test_empty_chunk_is_noop():
    dec = StreamDecoder()
    assert dec.feed(b"") == []
    assert dec.issues == []


def test_exhaustive_two_message_splits():
    rng = random.Random(11)
    msgs = [rand_result(rng, 2, 2), rand_frame_msg(rng, 2, 2)]
    stream = b"".join(encode(m) for m in msgs)
    for cut in range(len(stream) + 1):
        dec = StreamDecoder()
        out = dec.feed(stream[:cut]) + dec.feed(stream[cut:])
        assert out == msgs, f"failed at split {cut}"
        assert dec.issues == []


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.data())
def test_random_partition_invariance(seed, data):
    rng = random.Random(seed)
    msgs = [rand_message(rng) for _ in range(4)]
    stream = b"".join(encode(m) for m in msgs)
    cuts = sorted(
        data.draw(
            st.lists(st.integers(min_value=0, max_value=len(stream)), max_size=8)
        )
    )
    dec = StreamDecoder()
    out = []
    prev = 0
    for cut in cuts + [len(stream)]:
        out += dec.feed(stream[prev:cut])
        prev = cut
    assert out == msgs
    assert dec.issues == []


def test_corrupt_payload_discarded_stream_recovers():
    rng = random.Random(12)
    msgs = [rand_result(rng), rand_result(rng), rand_result(rng)]
    encoded = [encode(m) for m in msgs]
    blob = bytearray(b"".join(encoded))
    # flip one payload byte inside message 1
    blob[len(encoded[0]) + 9 + 3] ^= 0xA5
    dec = StreamDecoder()
    out = dec.feed(bytes(blob))
    assert out == [msgs[0], msgs[2]]
    assert [i.kind for i in dec.issues] == ["crc_mismatch"]


def test_resync_skips_bounded_garbage():
    rng = random.Random(13)
    msg = rand_result(rng)
    garbage = b"\x99" * 37
    dec = StreamDecoder()
    out = dec.feed(garbage + encode(msg))
    assert out == [msg]
    kinds = [i.kind for i in dec.issues]
    assert kinds.count("bad_magic") >= 1
    skipped = sum(int(i.detail.split()[1]) for i in dec.issues if i.kind == "bad_magic")
    assert skipped <= len(garbage) + 3


def test_resync_with_partial_magic_in_garbage():
    rng = random.Random(14)
    msg = rand_result(rng)
    # garbage ending with a magic prefix must not desync the real message
    garbage = b"\x00\x01DR" + b"MX" + b"DRM"
    dec = StreamDecoder()
    out = []
    stream = garbage + encode(msg)
    for i in range(0, len(stream), 3):
        out += dec.feed(stream[i:i + 3])
    assert out == [msg]


def test_unknown_message_type_reported():
    valid = encode(Bye())
    tampered = bytearray(valid)
    tampered[4] = 99
    import zlib

    body = bytes(tampered[4:9])
    tampered[9:13] = (zlib.crc32(body) & 0xFFFFFFFF).to_bytes(4, "little")
    dec = StreamDecoder()
    out = dec.feed(bytes(tampered))
    assert out == []
    assert [i.kind for i in dec.issues] == ["bad_payload"]


def test_oversized_length_field_resyncs():
    bad = MAGIC + bytes([1]) + (200 * 1024 * 1024).to_bytes(4, "little") + b"xxxx"
    dec = StreamDecoder()
    out = dec.feed(bad + encode(Bye()))
    assert out == [Bye()]
    assert any(i.kind == "oversized" for i in dec.issues)


# -- control payloads ------------------------------------------------------


def test_parse_control_accepts_known_actions():
    for action in (
        {"action": "select_object", "u": 10, "v": 20},
        {"action": "set_asset", "asset_id": "box"},
        {"action": "set_gating", "frame_passer": True, "early_stop": False},
        {"action": "set_anchor", "mode": "fixed_scale", "scale": 2.0},
        {"action": "get_metrics"},
    ):
        assert parse_control(make_control(action)) == action


def test_parse_control_rejects_malformed():
    from drpipe.errors import DrError

    for bad in (
        Control(b"not json"),
        Control(json.dumps({"action": "fly"}).encode()),
        Control(json.dumps({"action": "select_object", "u": "x", "v": 0}).encode()),
        Control(json.dumps({"action": "set_gating", "frame_passer": 1, "early_stop": True}).encode()),
    ):
        with pytest.raises(DrError):
            parse_control(bad)
