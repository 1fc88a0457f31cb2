import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from drpipe.pipeline import Accepted, DroppedOldest, FrameScheduler

from conftest import make_frame


def frame(i):
    return make_frame(np.zeros((2, 2, 3), dtype=np.uint8), frame_id=i, ts=i * 1000)


def test_single_submit_accepted():
    q = FrameScheduler(capacity=2)
    assert q.submit(frame(0)) == Accepted()
    assert q.pop(timeout=0.1).frame_id == 0


def test_capacity_one_drops_oldest():
    q = FrameScheduler(capacity=1)
    assert q.submit(frame(1)) == Accepted()
    out = q.submit(frame(2))
    assert out == DroppedOldest(dropped_id=1)
    assert q.pop(timeout=0.1).frame_id == 2


def test_newest_always_accepted():
    q = FrameScheduler(capacity=2)
    for i in range(10):
        q.submit(frame(i))
    got = [q.pop(timeout=0.1).frame_id for _ in range(2)]
    assert got == [8, 9]


def test_dropped_frames_never_pop():
    q = FrameScheduler(capacity=1)
    q.submit(frame(0))
    q.submit(frame(1))
    q.submit(frame(2))
    assert q.pop(timeout=0.1).frame_id == 2
    assert q.pop(timeout=0.05) is None
    assert q.dropped_ids == [0, 1]


def test_close_unblocks_pop():
    q = FrameScheduler(capacity=1)
    q.close()
    assert q.pop(timeout=1.0) is None


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.sampled_from(["submit", "pop"]), min_size=1, max_size=60),
    st.integers(min_value=1, max_value=4),
)
def test_bookkeeping_invariant(ops, capacity):
    q = FrameScheduler(capacity=capacity)
    next_id = 0
    for op in ops:
        if op == "submit":
            q.submit(frame(next_id))
            next_id += 1
        else:
            q.pop(timeout=0.001)
        snap = q.snapshot()
        assert snap["received"] == snap["processed"] + snap["dropped"] + snap["queued"]
