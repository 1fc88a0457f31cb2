"""Software rasterizer: z-buffered flat-shaded triangles under a pinhole camera.

Conventions, fixed so independent implementations agree pixel-for-pixel:
pixel (row, col) samples the ray through screen point (u=col, v=row);
top-left fill rule decides ownership of pixels exactly on shared edges;
depth is interpolated perspective-correct (linear in 1/z).
"""

from __future__ import annotations

import numpy as np

from ..core import Frame, InstanceMask, PinholeIntrinsics
from .asset import Asset
from .mapping import Placement

NEAR_PLANE = 0.01


def clip_triangle_near(tri: np.ndarray, near: float) -> list[np.ndarray]:
    """Clip one camera-space triangle against z >= near; 0..2 triangles out."""
    inside = tri[:, 2] >= near
    if inside.all():
        return [tri]
    if not inside.any():
        return []
    poly = []
    for i in range(3):
        cur, nxt = tri[i], tri[(i + 1) % 3]
        cin, nin = inside[i], inside[(i + 1) % 3]
        if cin:
            poly.append(cur)
        if cin != nin:
            t = (near - cur[2]) / (nxt[2] - cur[2])
            poly.append(cur + t * (nxt - cur))
    return [np.stack([poly[0], poly[i], poly[i + 1]]) for i in range(1, len(poly) - 1)]


def _raster_one(tri_cam, rgb, intr, width, height, zbuf, color, covered):
    z = tri_cam[:, 2]
    u = intr.fx * tri_cam[:, 0] / z + intr.cx
    v = intr.fy * tri_cam[:, 1] / z + intr.cy
    pts = np.stack([u, v], axis=1)

    e1 = pts[1] - pts[0]
    e2 = pts[2] - pts[0]
    area2 = e1[0] * e2[1] - e1[1] * e2[0]
    if area2 == 0.0:
        return
    if area2 < 0.0:
        pts = pts[[0, 2, 1]]
        z = z[[0, 2, 1]]
        area2 = -area2

    x0 = max(0, int(np.ceil(pts[:, 0].min())))
    x1 = min(width - 1, int(np.floor(pts[:, 0].max())))
    y0 = max(0, int(np.ceil(pts[:, 1].min())))
    y1 = min(height - 1, int(np.floor(pts[:, 1].max())))
    if x0 > x1 or y0 > y1:
        return

    px = np.arange(x0, x1 + 1, dtype=np.float64)[None, :]
    py = np.arange(y0, y1 + 1, dtype=np.float64)[:, None]

    inside = np.ones((y1 - y0 + 1, x1 - x0 + 1), dtype=bool)
    edges = []
    for a, b in ((0, 1), (1, 2), (2, 0)):
        dx = pts[b, 0] - pts[a, 0]
        dy = pts[b, 1] - pts[a, 1]
        e = dx * (py - pts[a, 1]) - dy * (px - pts[a, 0])
        # y grows downward: a horizontal edge with dx > 0 is a top edge,
        # an edge with dy < 0 is a left edge
        top_left = (dy == 0.0 and dx > 0.0) or dy < 0.0
        inside &= (e > 0.0) | ((e == 0.0) & top_left)
        edges.append(e)
    if not inside.any():
        return

    # barycentric weights from opposite-edge functions; linear in 1/z
    lam0 = edges[1] / area2
    lam1 = edges[2] / area2
    lam2 = edges[0] / area2
    inv_z = lam0 / z[0] + lam1 / z[1] + lam2 / z[2]
    depth = np.where(inv_z > 0.0, 1.0 / np.where(inv_z > 0.0, inv_z, 1.0), np.inf)

    zwin = zbuf[y0:y1 + 1, x0:x1 + 1]
    take = inside & (depth < zwin)
    if not take.any():
        return
    zwin[take] = depth[take]
    color[y0:y1 + 1, x0:x1 + 1][take] = rgb
    covered[y0:y1 + 1, x0:x1 + 1][take] = True


def rasterize_mesh(
    width: int,
    height: int,
    intr: PinholeIntrinsics,
    verts_cam: np.ndarray,
    triangles: np.ndarray,
    face_colors: np.ndarray,
    near: float = NEAR_PLANE,
):
    """Rasterize camera-space triangles; returns (color, covered, zbuf)."""
    zbuf = np.full((height, width), np.inf, dtype=np.float64)
    color = np.zeros((height, width, 3), dtype=np.uint8)
    covered = np.zeros((height, width), dtype=bool)
    for m in range(len(triangles)):
        tri = verts_cam[triangles[m]].astype(np.float64)
        for clipped in clip_triangle_near(tri, near):
            _raster_one(clipped, face_colors[m], intr, width, height, zbuf, color, covered)
    return color, covered, zbuf


def render_asset(
    base: Frame,
    asset: Asset,
    placement: Placement,
    intr: PinholeIntrinsics,
) -> tuple[Frame, InstanceMask]:
    """Composite the placed asset over a frame; untouched pixels stay bit-identical."""
    rot = placement.pose.rotation_matrix()
    verts_cam = (asset.vertices * placement.scale) @ rot.T + np.asarray(placement.pose.t)
    color, covered, zbuf = rasterize_mesh(
        base.width, base.height, intr, verts_cam, asset.triangles, asset.face_colors
    )
    if not covered.any():
        return base, InstanceMask.empty(base.width, base.height)
    out_px = base.pixels.copy()
    out_px[covered] = color[covered]
    out_depth = None
    if base.depth is not None:
        out_depth = base.depth.copy()
        out_depth[covered] = zbuf[covered].astype(np.float32)
    return base.with_pixels(out_px, depth=out_depth), InstanceMask.from_bool(covered)
