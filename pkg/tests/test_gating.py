import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import drpipe.core.quat as quat
from drpipe.core import IDENTITY_POSE, InstanceMask, Pose6D
from drpipe.errors import EmptyInstance, InvalidConfig, MissingPrevPose
from drpipe.gating import (
    BackgroundCache,
    Bypass2D,
    Continue3D,
    Forward2D,
    GatingConfig,
    PixelRect,
    Reuse3D,
    cache_note_bypass,
    cache_update,
    early_stop_decide,
    frame_passer_decide,
    predict_region,
)
from drpipe.perception import PoseFeatures

from conftest import make_frame


def mask_with_block(w, h, r0, r1, c0, c1):
    labels = np.zeros((h, w), dtype=np.uint16)
    labels[r0:r1 + 1, c0:c1 + 1] = 1
    return InstanceMask(w, h, labels)


def feats(centroid=(0, 0, 2), extent=(0.3, 0.2, 0.1), area=100):
    return PoseFeatures(centroid, extent, area)


# -- predict_region -------------------------------------------------------


def test_region_dilation():
    mask = mask_with_block(64, 48, 10, 20, 30, 40)
    rect = predict_region(mask, 1, 8)
    assert (rect.row0, rect.row1, rect.col0, rect.col1) == (2, 28, 22, 48)


def test_region_clipped_at_edges():
    mask = mask_with_block(64, 48, 0, 5, 0, 5)
    rect = predict_region(mask, 1, 8)
    assert (rect.row0, rect.col0) == (0, 0)
    assert (rect.row1, rect.col1) == (13, 13)


def test_region_missing_instance():
    mask = mask_with_block(64, 48, 0, 5, 0, 5)
    with pytest.raises(EmptyInstance):
        predict_region(mask, 2, 8)


# -- frame passer ---------------------------------------------------------


def run_forward(cache, cfg, frame, mask, pose=IDENTITY_POSE):
    cache_update(cache, cfg, frame, mask, pose)


def test_empty_cache_forwards():
    cfg = GatingConfig()
    cache = BackgroundCache(64, 48, cfg.tile_px)
    rect = PixelRect(0, 0, 15, 15)
    assert isinstance(frame_passer_decide(cache, cfg, IDENTITY_POSE, rect), Forward2D)


def test_static_fully_cached_bypasses():
    cfg = GatingConfig()
    cache = BackgroundCache(64, 48, cfg.tile_px)
    px = np.arange(64 * 48 * 3, dtype=np.uint8).reshape(48, 64, 3)
    frame = make_frame(px)
    run_forward(cache, cfg, frame, InstanceMask.empty(64, 48))
    rect = PixelRect(4, 4, 20, 20)
    decision = frame_passer_decide(cache, cfg, IDENTITY_POSE, rect)
    assert isinstance(decision, Bypass2D)
    assert np.array_equal(decision.patch, px[rect.slices()])


def test_no_region_forwards():
    cfg = GatingConfig()
    cache = BackgroundCache(64, 48, cfg.tile_px)
    run_forward(cache, cfg, make_frame(np.zeros((48, 64, 3), np.uint8)), InstanceMask.empty(64, 48))
    assert isinstance(frame_passer_decide(cache, cfg, IDENTITY_POSE, None), Forward2D)


def test_partial_coverage_below_tau_forwards():
    cfg = GatingConfig()  # tau_cover 1.0
    cache = BackgroundCache(64, 48, cfg.tile_px)
    frame = make_frame(np.zeros((48, 64, 3), np.uint8))
    mask = mask_with_block(64, 48, 0, 15, 0, 15)  # occupies exactly one tile
    run_forward(cache, cfg, frame, mask)
    rect = PixelRect(0, 0, 31, 31)  # spans cached and uncached tiles
    assert cache.coverage(rect) == pytest.approx(0.75)
    assert isinstance(frame_passer_decide(cache, cfg, IDENTITY_POSE, rect), Forward2D)
    relaxed = GatingConfig(tau_cover=0.7)
    assert isinstance(frame_passer_decide(cache, relaxed, IDENTITY_POSE, rect), Bypass2D)


def test_camera_motion_blocks_bypass_and_clears_cache():
    cfg = GatingConfig()
    cache = BackgroundCache(64, 48, cfg.tile_px)
    frame = make_frame(np.zeros((48, 64, 3), np.uint8))
    run_forward(cache, cfg, frame, InstanceMask.empty(64, 48))
    moved = Pose6D((0.5, 0.0, 0.0), quat.IDENTITY)
    rect = PixelRect(0, 0, 15, 15)
    assert isinstance(frame_passer_decide(cache, cfg, moved, rect), Forward2D)
    cache_update(cache, cfg, frame, InstanceMask.empty(64, 48), moved)
    assert cache.reference_camera_pose == moved
    assert cache.present.all()  # re-seeded from this forward pass


def test_tile_with_any_object_pixel_not_cached():
    cfg = GatingConfig()
    cache = BackgroundCache(64, 48, cfg.tile_px)
    frame = make_frame(np.zeros((48, 64, 3), np.uint8))
    mask = mask_with_block(64, 48, 0, 0, 0, 0)  # single labeled pixel in tile (0,0)
    run_forward(cache, cfg, frame, mask)
    assert not cache.present[0, 0]
    assert cache.present[0, 1]


def test_keyframe_counter_bounds_bypass_run():
    cfg = GatingConfig(keyframe_interval=5)
    cache = BackgroundCache(64, 48, cfg.tile_px)
    frame = make_frame(np.zeros((48, 64, 3), np.uint8))
    run_forward(cache, cfg, frame, InstanceMask.empty(64, 48))
    rect = PixelRect(0, 0, 15, 15)
    bypasses = 0
    while isinstance(frame_passer_decide(cache, cfg, IDENTITY_POSE, rect), Bypass2D):
        cache_note_bypass(cache)
        bypasses += 1
        assert bypasses < 50
    assert bypasses == cfg.keyframe_interval - 1  # a window of N frames always has a Forward


def test_config_validation():
    with pytest.raises(InvalidConfig):
        GatingConfig(tile_px=0)
    with pytest.raises(InvalidConfig):
        GatingConfig(tau_cover=0.0)
    with pytest.raises(InvalidConfig):
        GatingConfig(keyframe_interval=0)


# -- early stop -----------------------------------------------------------


def test_early_stop_identical_features_reuses():
    cfg = GatingConfig()
    prev_pose = Pose6D((0, 0, 2), quat.IDENTITY)
    d = early_stop_decide(feats(), feats(), prev_pose, cfg)
    assert isinstance(d, Reuse3D)
    assert d.distance == 0.0
    assert d.prev_pose == prev_pose


def test_early_stop_half_sigma_reuses():
    cfg = GatingConfig()  # sigma_t = 0.02
    prev = feats(centroid=(0.0, 0.0, 2.0))
    curr = feats(centroid=(0.01, 0.0, 2.0))
    d = early_stop_decide(prev, curr, Pose6D((0, 0, 2), quat.IDENTITY), cfg)
    assert isinstance(d, Reuse3D)
    assert d.distance == pytest.approx(0.5, abs=1e-6)


def test_early_stop_beyond_threshold_continues():
    cfg = GatingConfig()
    prev = feats(centroid=(0.0, 0.0, 2.0))
    curr = feats(centroid=(0.05, 0.0, 2.0))
    d = early_stop_decide(prev, curr, Pose6D((0, 0, 2), quat.IDENTITY), cfg)
    assert isinstance(d, Continue3D)
    assert d.distance == pytest.approx(2.5, abs=1e-6)


def test_early_stop_no_previous_continues():
    assert isinstance(early_stop_decide(None, feats(), None, GatingConfig()), Continue3D)


def test_early_stop_disabled_continues():
    cfg = GatingConfig(early_stop_enabled=False)
    d = early_stop_decide(feats(), feats(), Pose6D((0, 0, 2), quat.IDENTITY), cfg)
    assert isinstance(d, Continue3D)


def test_early_stop_missing_prev_pose_is_error():
    with pytest.raises(MissingPrevPose):
        early_stop_decide(feats(), feats(), None, GatingConfig())


@settings(max_examples=60)
@given(
    dt=st.floats(min_value=0, max_value=0.05),
    de=st.floats(min_value=0, max_value=0.05),
    shrink=st.floats(min_value=0.0, max_value=1.0),
)
def test_early_stop_monotone_sensitivity(dt, de, shrink):
    cfg = GatingConfig()
    prev_pose = Pose6D((0, 0, 2), quat.IDENTITY)
    base = feats()
    moved = feats(centroid=(dt, 0.0, 2.0), extent=(0.3 + de, 0.2, 0.1))
    nearer = feats(centroid=(dt * shrink, 0.0, 2.0), extent=(0.3 + de * shrink, 0.2, 0.1))
    if isinstance(early_stop_decide(base, moved, prev_pose, cfg), Reuse3D):
        assert isinstance(early_stop_decide(base, nearer, prev_pose, cfg), Reuse3D)
