"""Binary framing: DRM1 envelope with CRC32, plus a chunking-tolerant decoder.

Envelope: magic "DRM1" | msg_type u8 | payload_len u32 LE | payload |
crc32 u32 LE over msg_type‖payload_len‖payload (reflected 0xEDB88320,
init/xorout 0xFFFFFFFF — i.e. standard zlib CRC32).
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

from ..errors import DrError, OversizedPayload
from .messages import (
    MESSAGE_TYPES,
    MSG_BYE,
    MSG_CONTROL,
    MSG_ERROR,
    MSG_FRAME,
    MSG_HELLO,
    MSG_HELLO_ACK,
    MSG_METRICS,
    MSG_RESULT,
    Bye,
    Control,
    ErrorMsg,
    FrameMsg,
    Hello,
    HelloAck,
    Message,
    Metrics,
    ResultMsg,
)

MAGIC = b"DRM1"
HEADER_LEN = 9          # magic + type + payload_len
TRAILER_LEN = 4         # crc32
MAX_PAYLOAD = 64 * 1024 * 1024

# canonical timing order so identical timing dicts encode to identical bytes
_TIMING_ORDER = (
    "gate2d", "segment", "inpaint", "gate3d", "pose_coarse", "pose_refine",
    "compose", "transport_up", "transport_down", "total",
)


class DecodeError(DrError):
    pass


def _crc(body: bytes) -> int:
    return zlib.crc32(body) & 0xFFFFFFFF


def encode_payload(msg: Message) -> bytes:
    if isinstance(msg, Hello):
        return struct.pack("<H", msg.proto_version) + msg.session_cfg_json
    if isinstance(msg, HelloAck):
        return struct.pack("<QQ", msg.session_id, msg.epoch_us)
    if isinstance(msg, FrameMsg):
        head = struct.pack(
            "<QQIIB4f7f",
            msg.frame_id, msg.capture_ts, msg.width, msg.height,
            1 if msg.has_depth else 0, *msg.intrinsics, *msg.camera_pose,
        )
        return head + msg.rgb + (msg.depth or b"")
    if isinstance(msg, ResultMsg):
        parts = [struct.pack("<QBII", msg.frame_id, msg.flags, msg.width, msg.height)]
        if msg.pose is None:
            parts.append(b"\x00")
        else:
            parts.append(struct.pack("<B7f", 1, *msg.pose))
        if msg.placement is None:
            parts.append(b"\x00")
        else:
            parts.append(struct.pack("<B8f", 1, *msg.placement))
        names = [n for n in _TIMING_ORDER if n in msg.timings]
        names += sorted(set(msg.timings) - set(names))
        parts.append(struct.pack("<B", len(names)))
        for name in names:
            raw = name.encode("utf-8")
            parts.append(struct.pack("<B", len(raw)) + raw + struct.pack("<Q", int(msg.timings[name])))
        parts.append(msg.inpainted_rgb)
        if msg.composed_rgb is None:
            parts.append(b"\x00")
        else:
            parts.append(b"\x01" + msg.composed_rgb)
        return b"".join(parts)
    if isinstance(msg, Control):
        return msg.control_json
    if isinstance(msg, Metrics):
        return msg.report_json
    if isinstance(msg, ErrorMsg):
        return struct.pack("<H", msg.code) + msg.detail.encode("utf-8")
    if isinstance(msg, Bye):
        return b""
    raise TypeError(f"not a wire message: {msg!r}")


def encode(msg: Message) -> bytes:
    payload = encode_payload(msg)
    if len(payload) > MAX_PAYLOAD:
        raise OversizedPayload(f"payload {len(payload)} exceeds {MAX_PAYLOAD}")
    body = struct.pack("<BI", MESSAGE_TYPES[type(msg)], len(payload)) + payload
    return MAGIC + body + struct.pack("<I", _crc(body))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise DecodeError(f"payload truncated at offset {self.pos}")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def rest(self) -> bytes:
        out = self.data[self.pos:]
        self.pos = len(self.data)
        return out

    def done(self):
        if self.pos != len(self.data):
            raise DecodeError(f"{len(self.data) - self.pos} trailing payload bytes")


def decode_payload(msg_type: int, payload: bytes) -> Message:
    r = _Reader(payload)
    try:
        if msg_type == MSG_HELLO:
            (version,) = r.unpack("<H")
            return Hello(version, r.rest())
        if msg_type == MSG_HELLO_ACK:
            sid, epoch = r.unpack("<QQ")
            r.done()
            return HelloAck(sid, epoch)
        if msg_type == MSG_FRAME:
            fid, ts, w, h, has_depth = r.unpack("<QQIIB")
            if has_depth not in (0, 1):
                raise DecodeError(f"has_depth must be 0|1, got {has_depth}")
            intr = r.unpack("<4f")
            pose = r.unpack("<7f")
            if w <= 0 or h <= 0 or w > 8192 or h > 8192:
                raise DecodeError(f"bad frame dims {w}x{h}")
            rgb = r.take(w * h * 3)
            depth = r.take(w * h * 4) if has_depth else None
            r.done()
            return FrameMsg(fid, ts, w, h, intr, pose, rgb, depth)
        if msg_type == MSG_RESULT:
            fid, flags, w, h = r.unpack("<QBII")
            if w <= 0 or h <= 0 or w > 8192 or h > 8192:
                raise DecodeError(f"bad result dims {w}x{h}")
            (pose_present,) = r.unpack("<B")
            pose = r.unpack("<7f") if pose_present else None
            (pl_present,) = r.unpack("<B")
            placement = r.unpack("<8f") if pl_present else None
            (count,) = r.unpack("<B")
            timings = {}
            for _ in range(count):
                (nlen,) = r.unpack("<B")
                name = r.take(nlen).decode("utf-8")
                (us,) = r.unpack("<Q")
                timings[name] = us
            rgb = r.take(w * h * 3)
            (comp_present,) = r.unpack("<B")
            composed = r.take(w * h * 3) if comp_present else None
            r.done()
            return ResultMsg(fid, flags, w, h, rgb, pose, placement, timings, composed)
        if msg_type == MSG_CONTROL:
            return Control(r.rest())
        if msg_type == MSG_METRICS:
            return Metrics(r.rest())
        if msg_type == MSG_ERROR:
            (code,) = r.unpack("<H")
            return ErrorMsg(code, r.rest().decode("utf-8"))
        if msg_type == MSG_BYE:
            r.done()
            return Bye()
    except (ValueError, UnicodeDecodeError, DrError) as exc:
        if isinstance(exc, DecodeError):
            raise
        raise DecodeError(f"bad payload for type {msg_type}: {exc}") from exc
    raise DecodeError(f"unknown message type {msg_type}")


@dataclass(frozen=True)
class DecodeIssue:
    kind: str     # bad_magic | crc_mismatch | oversized | bad_payload
    detail: str


class StreamDecoder:
    """Stateful parser tolerant of arbitrary chunk boundaries.

    feed() returns every complete message parsed so far; framing problems
    are recorded on .issues and the stream continues at the next magic.
    """

    def __init__(self):
        self._buf = bytearray()
        self.issues: list[DecodeIssue] = []

    def feed(self, chunk: bytes) -> list[Message]:
        self._buf.extend(chunk)
        out: list[Message] = []
        while True:
            if not self._resync():
                break
            if len(self._buf) < HEADER_LEN:
                break
            msg_type = self._buf[4]
            (payload_len,) = struct.unpack_from("<I", self._buf, 5)
            if payload_len > MAX_PAYLOAD:
                self.issues.append(
                    DecodeIssue("oversized", f"payload_len {payload_len}")
                )
                del self._buf[:4]
                continue
            frame_len = HEADER_LEN + payload_len + TRAILER_LEN
            if len(self._buf) < frame_len:
                break
            body = bytes(self._buf[4:HEADER_LEN + payload_len])
            (crc,) = struct.unpack_from("<I", self._buf, HEADER_LEN + payload_len)
            if _crc(body) != crc:
                self.issues.append(
                    DecodeIssue("crc_mismatch", f"type {msg_type} len {payload_len}")
                )
                del self._buf[:frame_len]
                continue
            payload = body[5:]
            del self._buf[:frame_len]
            try:
                out.append(decode_payload(msg_type, payload))
            except DecodeError as exc:
                self.issues.append(DecodeIssue("bad_payload", str(exc)))
        return out

    def _resync(self) -> bool:
        """Ensure the buffer starts with magic; True when it does (or may, once
        more bytes arrive)."""
        buf = self._buf
        if len(buf) >= 4:
            if buf[:4] == MAGIC:
                return True
            idx = bytes(buf).find(MAGIC)
            if idx >= 0:
                self.issues.append(DecodeIssue("bad_magic", f"skipped {idx} bytes"))
                del buf[:idx]
                return True
            # keep at most a partial-magic suffix
            keep = 0
            for k in (3, 2, 1):
                if buf[-k:] == MAGIC[:k]:
                    keep = k
                    break
            skipped = len(buf) - keep
            if skipped:
                self.issues.append(DecodeIssue("bad_magic", f"skipped {skipped} bytes"))
                del buf[:skipped]
            return False
        if bytes(buf) == MAGIC[: len(buf)]:
            return False
        # partial buffer that cannot extend to magic: trim to a viable suffix
        for k in range(len(buf) - 1, 0, -1):
            if buf[-k:] == MAGIC[:k]:
                self.issues.append(DecodeIssue("bad_magic", f"skipped {len(buf) - k} bytes"))
                del buf[: len(buf) - k]
                return False
        self.issues.append(DecodeIssue("bad_magic", f"skipped {len(buf)} bytes"))
        del buf[:]
        return False
