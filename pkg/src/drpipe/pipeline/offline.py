"""In-process harness: run a whole bundle through one session, no transport."""

from __future__ import annotations

from ..scenegen import SequenceBundle
from .config import SessionConfig
from .report import build_run_report
from .session import SEQUENTIAL, Session


def end_to_end_once(
    bundle: SequenceBundle,
    cfg: SessionConfig,
    backends=None,
    asset_store=None,
    branch_mode: str = SEQUENTIAL,
):
    """Feed every frame in order without drops; returns (results, report).

    Accepts a SequenceBundle or any iterable of frames (possibly empty).
    """
    frames = getattr(bundle, "frames", bundle)
    session = Session(cfg, backends=backends, asset_store=asset_store, branch_mode=branch_mode)
    try:
        results = [session.process_frame(frame) for frame in frames]
    finally:
        session.close()
    return results, build_run_report(results, dropped=0)
