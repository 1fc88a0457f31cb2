from __future__ import annotations

import numpy as np
import pytest

from drpipe.core import Frame, PinholeIntrinsics
from drpipe.pipeline import default_session_config
from drpipe.scenegen import (
    default_scene_config,
    generate_sequence,
    prepend_background_warmup,
)

INTR = PinholeIntrinsics(200.0, 200.0, 160.0, 120.0)


@pytest.fixture(scope="session")
def default_bundle():
    return generate_sequence(default_scene_config(seed=42, frame_count=30))


@pytest.fixture(scope="session")
def warm_bundle(default_bundle):
    return prepend_background_warmup(default_bundle)


@pytest.fixture()
def session_cfg():
    return default_session_config()


def make_frame(pixels, depth=None, frame_id=0, ts=0, intr=None):
    px = np.asarray(pixels, dtype=np.uint8)
    h, w = px.shape[:2]
    return Frame(
        frame_id=frame_id,
        capture_ts=ts,
        width=w,
        height=h,
        pixels=px,
        intrinsics=intr or PinholeIntrinsics(200.0, 200.0, min(w - 1, w / 2), min(h - 1, h / 2)),
        depth=depth,
    )
