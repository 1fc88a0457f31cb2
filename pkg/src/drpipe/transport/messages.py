"""Logical wire messages. Field values mirror the binary layout exactly
(poses are 7 f32 values, placements 8), so decode(encode(m)) == m holds
field-for-field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..core import f32
from ..errors import NonFiniteFloat

MSG_HELLO = 1
MSG_HELLO_ACK = 2
MSG_FRAME = 3
MSG_RESULT = 4
MSG_CONTROL = 5
MSG_METRICS = 6
MSG_ERROR = 7
MSG_BYE = 8

FLAG_BYPASS = 0x01
FLAG_REUSE = 0x02
FLAG_KEYFRAME = 0x04
FLAG_NO_TARGET = 0x08

ERR_BAD_VERSION = 1000
ERR_TOO_MANY_SESSIONS = 1001
ERR_PROTOCOL = 1002
ERR_CONTROL = 1003
ERR_STAGE = 1004


def _check_f32_tuple(name: str, values, n: int):
    vals = tuple(f32(v) for v in values)
    if len(vals) != n:
        raise ValueError(f"{name} needs {n} floats, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise NonFiniteFloat(f"{name} contains a non-finite value")
    return vals


@dataclass(frozen=True)
class Hello:
    proto_version: int
    session_cfg_json: bytes

    def __post_init__(self):
        if not (0 <= self.proto_version <= 0xFFFF):
            raise ValueError("proto_version out of u16 range")
        object.__setattr__(self, "session_cfg_json", bytes(self.session_cfg_json))


@dataclass(frozen=True)
class HelloAck:
    session_id: int
    epoch_us: int

    def __post_init__(self):
        for name in ("session_id", "epoch_us"):
            v = getattr(self, name)
            if not (0 <= v < 2**64):
                raise ValueError(f"{name} out of u64 range")


@dataclass(frozen=True)
class FrameMsg:
    frame_id: int
    capture_ts: int
    width: int
    height: int
    intrinsics: tuple  # fx, fy, cx, cy
    camera_pose: tuple  # tx, ty, tz, qw, qx, qy, qz
    rgb: bytes
    depth: bytes | None = None

    def __post_init__(self):
        if not (0 < self.width <= 8192 and 0 < self.height <= 8192):
            raise ValueError(f"bad dimensions {self.width}x{self.height}")
        object.__setattr__(self, "intrinsics", _check_f32_tuple("intrinsics", self.intrinsics, 4))
        object.__setattr__(self, "camera_pose", _check_f32_tuple("camera_pose", self.camera_pose, 7))
        rgb = bytes(self.rgb)
        if len(rgb) != self.width * self.height * 3:
            raise ValueError(
                f"rgb length {len(rgb)} != {self.width * self.height * 3}"
            )
        object.__setattr__(self, "rgb", rgb)
        if self.depth is not None:
            depth = bytes(self.depth)
            if len(depth) != self.width * self.height * 4:
                raise ValueError(f"depth length {len(depth)} != {self.width * self.height * 4}")
            object.__setattr__(self, "depth", depth)

    @property
    def has_depth(self) -> bool:
        return self.depth is not None


@dataclass(frozen=True)
class ResultMsg:
    frame_id: int
    flags: int
    width: int
    height: int
    inpainted_rgb: bytes
    pose: tuple | None = None        # 7 f32
    placement: tuple | None = None   # 8 f32: pose + scale
    timings: dict = field(default_factory=dict)
    composed_rgb: bytes | None = None

    def __post_init__(self):
        if self.flags & ~0x0F:
            raise ValueError("flags bits 4..7 must be zero")
        if not (0 < self.width <= 8192 and 0 < self.height <= 8192):
            raise ValueError(f"bad dimensions {self.width}x{self.height}")
        n = self.width * self.height * 3
        rgb = bytes(self.inpainted_rgb)
        if len(rgb) != n:
            raise ValueError(f"inpainted rgb length {len(rgb)} != {n}")
        object.__setattr__(self, "inpainted_rgb", rgb)
        if self.pose is not None:
            object.__setattr__(self, "pose", _check_f32_tuple("pose", self.pose, 7))
        if self.placement is not None:
            object.__setattr__(self, "placement", _check_f32_tuple("placement", self.placement, 8))
        for name, us in self.timings.items():
            if not isinstance(name, str) or len(name.encode()) > 255:
                raise ValueError("timing name must be a short string")
            if not (0 <= int(us) < 2**64):
                raise ValueError("timing value out of u64 range")
        if self.composed_rgb is not None:
            comp = bytes(self.composed_rgb)
            if len(comp) != n:
                raise ValueError(f"composed rgb length {len(comp)} != {n}")
            object.__setattr__(self, "composed_rgb", comp)

    def __eq__(self, other):
        if not isinstance(other, ResultMsg):
            return NotImplemented
        return (
            self.frame_id == other.frame_id
            and self.flags == other.flags
            and self.width == other.width
            and self.height == other.height
            and self.inpainted_rgb == other.inpainted_rgb
            and self.pose == other.pose
            and self.placement == other.placement
            and dict(self.timings) == dict(other.timings)
            and self.composed_rgb == other.composed_rgb
        )


@dataclass(frozen=True)
class Control:
    control_json: bytes

    def __post_init__(self):
        object.__setattr__(self, "control_json", bytes(self.control_json))


@dataclass(frozen=True)
class Metrics:
    report_json: bytes

    def __post_init__(self):
        object.__setattr__(self, "report_json", bytes(self.report_json))


@dataclass(frozen=True)
class ErrorMsg:
    code: int
    detail: str

    def __post_init__(self):
        if not (0 <= self.code <= 0xFFFF):
            raise ValueError("error code out of u16 range")


@dataclass(frozen=True)
class Bye:
    pass


Message = Hello | HelloAck | FrameMsg | ResultMsg | Control | Metrics | ErrorMsg | Bye

MESSAGE_TYPES = {
    Hello: MSG_HELLO,
    HelloAck: MSG_HELLO_ACK,
    FrameMsg: MSG_FRAME,
    ResultMsg: MSG_RESULT,
    Control: MSG_CONTROL,
    Metrics: MSG_METRICS,
    ErrorMsg: MSG_ERROR,
    Bye: MSG_BYE,
}
