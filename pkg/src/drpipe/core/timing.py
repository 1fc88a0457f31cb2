"""Latency budgets, per-stage timing records, percentile helpers."""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass

from ..errors import NonPositiveFps

STAGES = (
    "gate2d",
    "segment",
    "inpaint",
    "gate3d",
    "pose_coarse",
    "pose_refine",
    "compose",
    "transport_up",
    "transport_down",
    "total",
)


@dataclass(frozen=True)
class LatencyBudget:
    target_fps: float
    budget_us: int

    def __post_init__(self):
        if not self.target_fps > 0:
            raise NonPositiveFps(f"fps must be positive, got {self.target_fps}")
        expected = _round_half_up(1e6 / self.target_fps)
        if self.budget_us != expected:
            raise ValueError(f"budget_us {self.budget_us} != round(1e6/fps) = {expected}")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def budget_for_fps(fps: float) -> LatencyBudget:
    if not fps > 0:
        raise NonPositiveFps(f"fps must be positive, got {fps}")
    return LatencyBudget(target_fps=float(fps), budget_us=_round_half_up(1e6 / fps))


class StageTimings:
    """Microsecond durations keyed by stage name; skipped stages are absent."""

    def __init__(self, values: dict[str, int] | None = None):
        vals = dict(values or {})
        for name, us in vals.items():
            if name not in STAGES:
                raise ValueError(f"unknown stage {name!r}")
            if not isinstance(us, int) or us < 0:
                raise ValueError(f"stage {name} duration must be a non-negative int, got {us!r}")
        if "total" in vals:
            rest = [us for name, us in vals.items() if name != "total"]
            if rest and vals["total"] < max(rest):
                raise ValueError("total smaller than a recorded stage")
        self._values = vals

    def __contains__(self, name: str) -> bool:
        return name in self._values

    def __getitem__(self, name: str) -> int:
        return self._values[name]

    def get(self, name: str, default=None):
        return self._values.get(name, default)

    def as_dict(self) -> dict[str, int]:
        # canonical stage order for deterministic serialization
        return {name: self._values[name] for name in STAGES if name in self._values}

    def __eq__(self, other) -> bool:
        if not isinstance(other, StageTimings):
            return NotImplemented
        return self._values == other._values

    def __repr__(self) -> str:
        return f"StageTimings({self.as_dict()})"


class StageClock:
    """Accumulates stage durations while a frame is processed; thread-safe."""

    def __init__(self):
        self._us: dict[str, int] = {}
        self._lock = threading.Lock()

    def measure(self, name: str):
        return _StageSpan(self, name)

    def add(self, name: str, us: int) -> None:
        with self._lock:
            self._us[name] = self._us.get(name, 0) + int(us)

    def finish(self) -> StageTimings:
        with self._lock:
            vals = dict(self._us)
        if vals:
            vals["total"] = max(vals.get("total", 0), max(vals.values()))
        return StageTimings(vals)


class _StageSpan:
    def __init__(self, clock: StageClock, name: str):
        self._clock = clock
        self._name = name

    def __enter__(self):
        self._t0 = time.perf_counter_ns()
        return self

    def __exit__(self, exc_type, exc, tb):
        self._clock.add(self._name, (time.perf_counter_ns() - self._t0) // 1000)
        return False


def percentile(values, q: float) -> float:
    """Nearest-rank percentile; deterministic for integer inputs."""
    if not values:
        raise ValueError("no values")
    ordered = sorted(values)
    rank = max(1, math.ceil(q / 100.0 * len(ordered)))
    return ordered[rank - 1]


def percentile_summary(values, quantiles=(50, 95, 99)) -> dict[str, float]:
    return {f"p{q}": percentile(values, q) for q in quantiles}
