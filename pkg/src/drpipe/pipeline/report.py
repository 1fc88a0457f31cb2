"""Run-report JSON shared by the offline harness, server metrics, and bench."""

from __future__ import annotations

from ..core import STAGES
from ..core.timing import percentile_summary


def build_run_report(results, dropped: int = 0) -> dict:
    frames = len(results)
    bypass = sum(1 for r in results if r.flags.frame_passer_bypass)
    reuse = sum(1 for r in results if r.flags.early_stop_reuse)
    stage_us = {}
    for stage in STAGES:
        if stage == "total":
            continue
        vals = [r.timings[stage] for r in results if stage in r.timings]
        if vals:
            stage_us[stage] = percentile_summary(vals)
    totals = [r.timings["total"] for r in results if "total" in r.timings]
    return {
        "frames": frames,
        "dropped": dropped,
        "bypass_rate": bypass / frames if frames else 0.0,
        "reuse_rate": reuse / frames if frames else 0.0,
        "stage_us": stage_us,
        "total_us": percentile_summary(totals) if totals else {},
    }
