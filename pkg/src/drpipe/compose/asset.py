"""Substitute assets: built-in procedural meshes plus a minimal text format.

Text format, line oriented, LF endings:
    # comment
    v x y z          vertex, meters, asset-local frame centered at origin
    f i j k r g b    triangle, 1-based vertex indices, face color 0-255
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import AssetFormatError, UnknownAsset


@dataclass(frozen=True)
class Asset:
    asset_id: str
    vertices: np.ndarray          # (N, 3) float64
    triangles: np.ndarray         # (M, 3) int32 vertex indices
    face_colors: np.ndarray       # (M, 3) uint8
    local_extent: tuple[float, float, float] = field(init=False)

    def __post_init__(self):
        verts = np.ascontiguousarray(self.vertices, dtype=np.float64)
        tris = np.ascontiguousarray(self.triangles, dtype=np.int32)
        colors = np.ascontiguousarray(self.face_colors, dtype=np.uint8)
        if verts.ndim != 2 or verts.shape[1] != 3 or verts.shape[0] < 3:
            raise AssetFormatError(f"bad vertex array shape {verts.shape}")
        if tris.ndim != 2 or tris.shape[1] != 3 or tris.shape[0] < 1:
            raise AssetFormatError("asset needs at least one triangle")
        if colors.shape != (tris.shape[0], 3):
            raise AssetFormatError("one rgb color per triangle required")
        if tris.min() < 0 or tris.max() >= verts.shape[0]:
            raise AssetFormatError("triangle index out of range")
        if not np.isfinite(verts).all():
            raise AssetFormatError("non-finite vertex coordinate")
        extent = tuple(float(e) for e in verts.max(axis=0) - verts.min(axis=0))
        if min(extent) <= 0.0:
            raise AssetFormatError(f"degenerate asset extent {extent}")
        for arr in (verts, tris, colors):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "triangles", tris)
        object.__setattr__(self, "face_colors", colors)
        object.__setattr__(self, "local_extent", extent)


def box_mesh(extents, face_colors) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Axis-aligned box centered at origin; face order -x +x -y +y -z +z."""
    ex, ey, ez = (e / 2.0 for e in extents)
    verts = np.array(
        [
            [-ex, -ey, -ez], [ex, -ey, -ez], [ex, ey, -ez], [-ex, ey, -ez],
            [-ex, -ey, ez], [ex, -ey, ez], [ex, ey, ez], [-ex, ey, ez],
        ],
        dtype=np.float64,
    )
    quads = [
        (0, 3, 7, 4),  # -x
        (1, 5, 6, 2),  # +x
        (0, 4, 5, 1),  # -y
        (3, 2, 6, 7),  # +y
        (0, 1, 2, 3),  # -z
        (4, 7, 6, 5),  # +z
    ]
    tris = []
    colors = []
    for face, (a, b, c, d) in enumerate(quads):
        tris.append((a, b, c))
        tris.append((a, c, d))
        colors.append(face_colors[face])
        colors.append(face_colors[face])
    return verts, np.array(tris, dtype=np.int32), np.array(colors, dtype=np.uint8)


def make_box_asset(asset_id, extents, face_colors) -> Asset:
    verts, tris, colors = box_mesh(extents, face_colors)
    return Asset(asset_id, verts, tris, colors)


# Substitute palette, deliberately different from scenegen's object colors.
_BOX_COLORS = (
    (250, 60, 160), (60, 250, 230), (250, 200, 40),
    (140, 60, 250), (60, 140, 250), (250, 120, 60),
)


def _builtin_box() -> Asset:
    return make_box_asset("box", (1.0, 0.8, 0.6), _BOX_COLORS)


def _builtin_pyramid() -> Asset:
    s = 0.5
    verts = np.array(
        [[-s, s, -s], [s, s, -s], [s, s, s], [-s, s, s], [0.0, -s, 0.0]],
        dtype=np.float64,
    )
    tris = np.array(
        [(0, 1, 2), (0, 2, 3), (0, 4, 1), (1, 4, 2), (2, 4, 3), (3, 4, 0)],
        dtype=np.int32,
    )
    colors = np.array(
        [(90, 90, 110), (90, 90, 110), (250, 90, 40), (240, 200, 40), (90, 220, 90), (80, 130, 250)],
        dtype=np.uint8,
    )
    return Asset("pyramid", verts, tris, colors)


def parse_asset_text(text: str, asset_id: str) -> Asset:
    verts: list[tuple[float, float, float]] = []
    tris: list[tuple[int, int, int]] = []
    colors: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "v":
            if len(parts) != 4:
                raise AssetFormatError(f"line {lineno}: v needs 3 coordinates")
            try:
                xyz = tuple(float(p) for p in parts[1:])
            except ValueError as exc:
                raise AssetFormatError(f"line {lineno}: bad float") from exc
            if not all(math.isfinite(v) for v in xyz):
                raise AssetFormatError(f"line {lineno}: non-finite coordinate")
            verts.append(xyz)
        elif parts[0] == "f":
            if len(parts) != 7:
                raise AssetFormatError(f"line {lineno}: f needs 3 indices and rgb")
            try:
                idx = tuple(int(p) for p in parts[1:4])
                rgb = tuple(int(p) for p in parts[4:7])
            except ValueError as exc:
                raise AssetFormatError(f"line {lineno}: bad integer") from exc
            if any(i < 1 or i > len(verts) for i in idx):
                raise AssetFormatError(f"line {lineno}: vertex index out of range")
            if any(c < 0 or c > 255 for c in rgb):
                raise AssetFormatError(f"line {lineno}: color out of range")
            tris.append(tuple(i - 1 for i in idx))
            colors.append(rgb)
        else:
            raise AssetFormatError(f"line {lineno}: unknown directive {parts[0]!r}")
    if not tris:
        raise AssetFormatError("asset has no triangles")
    return Asset(
        asset_id,
        np.array(verts, dtype=np.float64),
        np.array(tris, dtype=np.int32),
        np.array(colors, dtype=np.uint8),
    )


def load_asset_file(path) -> Asset:
    path = Path(path)
    return parse_asset_text(path.read_text(encoding="ascii"), path.stem)


class AssetStore:
    """Built-in assets plus .mesh files from an optional directory."""

    def __init__(self, asset_dir=None):
        self._assets: dict[str, Asset] = {}
        for asset in (_builtin_box(), _builtin_pyramid()):
            self._assets[asset.asset_id] = asset
        if asset_dir is not None:
            for path in sorted(Path(asset_dir).glob("*.mesh")):
                asset = load_asset_file(path)
                self._assets[asset.asset_id] = asset

    def get(self, asset_id: str) -> Asset:
        try:
            return self._assets[asset_id]
        except KeyError:
            raise UnknownAsset(f"no asset {asset_id!r}; have {sorted(self._assets)}") from None

    def ids(self) -> list[str]:
        return sorted(self._assets)
