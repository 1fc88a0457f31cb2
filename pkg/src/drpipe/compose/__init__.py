from .asset import Asset, AssetStore, load_asset_file, make_box_asset, parse_asset_text
from .mapping import (
    FIT_EXTENT,
    FIXED_SCALE,
    FULL_POSE,
    TRANSLATION_ONLY,
    AnchorPolicy,
    Placement,
    map_pose,
)
from .raster import NEAR_PLANE, clip_triangle_near, rasterize_mesh, render_asset

__all__ = [
    "Asset",
    "AssetStore",
    "load_asset_file",
    "make_box_asset",
    "parse_asset_text",
    "AnchorPolicy",
    "Placement",
    "map_pose",
    "FIT_EXTENT",
    "FIXED_SCALE",
    "FULL_POSE",
    "TRANSLATION_ONLY",
    "NEAR_PLANE",
    "clip_triangle_near",
    "rasterize_mesh",
    "render_asset",
]
