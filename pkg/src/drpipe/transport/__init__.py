from .convert import (
    CONTROL_ACTIONS,
    frame_to_msg,
    make_control,
    make_metrics,
    msg_placement,
    msg_pose,
    msg_to_frame,
    parse_control,
    parse_metrics,
    pose_to_wire,
    result_to_msg,
    rgb_array,
    wire_to_pose,
)
from .messages import (
    ERR_BAD_VERSION,
    ERR_CONTROL,
    ERR_PROTOCOL,
    ERR_STAGE,
    ERR_TOO_MANY_SESSIONS,
    FLAG_BYPASS,
    FLAG_KEYFRAME,
    FLAG_NO_TARGET,
    FLAG_REUSE,
    MESSAGE_TYPES,
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
from .wire import (
    HEADER_LEN,
    MAGIC,
    MAX_PAYLOAD,
    TRAILER_LEN,
    DecodeError,
    DecodeIssue,
    StreamDecoder,
    decode_payload,
    encode,
    encode_payload,
)

__all__ = [
    "CONTROL_ACTIONS",
    "frame_to_msg",
    "make_control",
    "make_metrics",
    "msg_placement",
    "msg_pose",
    "msg_to_frame",
    "parse_control",
    "parse_metrics",
    "pose_to_wire",
    "result_to_msg",
    "rgb_array",
    "wire_to_pose",
    "ERR_BAD_VERSION",
    "ERR_CONTROL",
    "ERR_PROTOCOL",
    "ERR_STAGE",
    "ERR_TOO_MANY_SESSIONS",
    "FLAG_BYPASS",
    "FLAG_KEYFRAME",
    "FLAG_NO_TARGET",
    "FLAG_REUSE",
    "MESSAGE_TYPES",
    "Bye",
    "Control",
    "ErrorMsg",
    "FrameMsg",
    "Hello",
    "HelloAck",
    "Message",
    "Metrics",
    "ResultMsg",
    "HEADER_LEN",
    "MAGIC",
    "MAX_PAYLOAD",
    "TRAILER_LEN",
    "DecodeError",
    "DecodeIssue",
    "StreamDecoder",
    "decode_payload",
    "encode",
    "encode_payload",
]
