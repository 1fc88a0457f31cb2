import numpy as np
import pytest

from drpipe.errors import UnsupportedTargetMode
from drpipe.perception import INSTANCE_ID, TargetSpec, segment
from drpipe.scenegen import DEFAULT_FACE_COLORS

from conftest import make_frame
from oracles import flood_fill_segment

KEY = ((200, 30, 30),)


def spec(colors=KEY, tolerance=0, min_px=1):
    return TargetSpec(colors=colors, tolerance=tolerance, min_instance_px=min_px)


def test_no_match_is_empty():
    frame = make_frame(np.full((8, 8, 3), 90, dtype=np.uint8))
    mask = segment(frame, spec())
    assert mask.instance_count == 0
    assert not mask.labels.any()


def test_two_blocks_labeled_in_scan_order():
    px = np.zeros((10, 10, 3), dtype=np.uint8)
    px[1:3, 1:3] = KEY[0]
    px[6:8, 5:7] = KEY[0]
    mask = segment(make_frame(px), spec())
    assert mask.instance_count == 2
    assert mask.labels[1, 1] == 1
    assert mask.labels[6, 5] == 2


def test_small_components_dropped():
    px = np.zeros((10, 10, 3), dtype=np.uint8)
    px[0, 0] = KEY[0]          # 1 px, below threshold
    px[5:8, 5:8] = KEY[0]      # 9 px, kept
    mask = segment(make_frame(px), spec(min_px=4))
    assert mask.instance_count == 1
    assert mask.labels[0, 0] == 0
    assert mask.labels[5, 5] == 1


def test_tolerance_max_channel_rule():
    px = np.zeros((2, 2, 3), dtype=np.uint8)
    px[0, 0] = (200 - 12, 30 + 12, 30)      # every channel within 12
    px[0, 1] = (200 - 13, 30, 30)           # one channel at 13
    mask = segment(make_frame(px), spec(tolerance=12))
    assert mask.labels[0, 0] == 1
    assert mask.labels[0, 1] == 0


def test_diagonal_pixels_are_separate_components():
    px = np.zeros((4, 4, 3), dtype=np.uint8)
    px[0, 0] = KEY[0]
    px[1, 1] = KEY[0]
    mask = segment(make_frame(px), spec())
    assert mask.instance_count == 2


def test_matches_scenegen_ground_truth(default_bundle):
    frame = default_bundle.frames[0]
    mask = segment(frame, TargetSpec(colors=DEFAULT_FACE_COLORS, tolerance=0, min_instance_px=16))
    assert np.array_equal(mask.labels, default_bundle.gt_masks[0].labels)


def test_instance_id_mode_unsupported_by_reference_segmenter():
    frame = make_frame(np.zeros((4, 4, 3), dtype=np.uint8))
    with pytest.raises(UnsupportedTargetMode):
        segment(frame, TargetSpec(mode=INSTANCE_ID, label=1))


def test_deterministic():
    rng = np.random.default_rng(0)
    px = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
    frame = make_frame(px)
    s = spec(colors=((120, 120, 120),), tolerance=60, min_px=2)
    a = segment(frame, s)
    b = segment(frame, s)
    assert np.array_equal(a.labels, b.labels)


@pytest.mark.parametrize("seed", range(12))
def test_flood_fill_oracle_random_frames(seed):
    rng = np.random.default_rng(seed)
    h, w = rng.integers(4, 33, size=2)
    # coarse palette makes chroma matches frequent enough to form blobs
    px = (rng.integers(0, 4, size=(h, w, 3)) * 60).astype(np.uint8)
    colors = ((0, 60, 120), (180, 180, 0))
    tol = int(rng.integers(0, 70))
    min_px = int(rng.integers(1, 6))
    got = segment(make_frame(px), spec(colors=colors, tolerance=tol, min_px=min_px))
    want = flood_fill_segment(px, colors, tol, min_px)
    assert np.array_equal(got.labels, want)
