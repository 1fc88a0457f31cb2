from .config import (
    CLIENT,
    SERVER,
    SessionConfig,
    default_session_config,
    session_config_from_json,
    session_config_to_json,
    with_gating_toggles,
)
from .offline import end_to_end_once
from .report import build_run_report
from .result import GateFlags, PipelineResult
from .results_io import ResultRecord, read_results_dir, record_from_result, write_results_dir
from .scheduler import Accepted, DroppedOldest, FrameScheduler
from .session import SEQUENTIAL, THREADED, Session

__all__ = [
    "CLIENT",
    "SERVER",
    "SessionConfig",
    "default_session_config",
    "session_config_from_json",
    "session_config_to_json",
    "with_gating_toggles",
    "end_to_end_once",
    "build_run_report",
    "GateFlags",
    "PipelineResult",
    "ResultRecord",
    "read_results_dir",
    "record_from_result",
    "write_results_dir",
    "Accepted",
    "DroppedOldest",
    "FrameScheduler",
    "SEQUENTIAL",
    "THREADED",
    "Session",
]
