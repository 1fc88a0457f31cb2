"""Real-time backpressure: bounded queue that drops the oldest pending frame.

Fresher frames matter more in a live mirror, so the newest submission is
always accepted and the oldest not-yet-started frame pays for it.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass

from ..core import Frame


@dataclass(frozen=True)
class Accepted:
    pass


@dataclass(frozen=True)
class DroppedOldest:
    dropped_id: int


class FrameScheduler:
    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._queue: deque[Frame] = deque()
        self._lock = threading.Lock()
        self._ready = threading.Condition(self._lock)
        self._closed = False
        self.received = 0
        self.processed = 0
        self.dropped = 0
        self.dropped_ids: list[int] = []

    def submit(self, frame: Frame) -> Accepted | DroppedOldest:
        with self._lock:
            self.received += 1
            outcome: Accepted | DroppedOldest = Accepted()
            if len(self._queue) >= self.capacity:
                oldest = self._queue.popleft()
                self.dropped += 1
                self.dropped_ids.append(oldest.frame_id)
                outcome = DroppedOldest(dropped_id=oldest.frame_id)
            self._queue.append(frame)
            self._ready.notify()
            return outcome

    def pop(self, timeout: float | None = None) -> Frame | None:
        """Next frame to process (counts as started); None on timeout or close."""
        with self._lock:
            while not self._queue and not self._closed:
                if not self._ready.wait(timeout=timeout):
                    return None
            if not self._queue:
                return None
            frame = self._queue.popleft()
            self.processed += 1
            return frame

    def close(self) -> None:
        with self._lock:
            self._closed = True
            self._ready.notify_all()

    def queue_len(self) -> int:
        with self._lock:
            return len(self._queue)

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "received": self.received,
                "processed": self.processed,
                "dropped": self.dropped,
                "queued": len(self._queue),
            }
