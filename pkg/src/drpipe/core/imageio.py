"""Fixture/output file formats: binary PPM (RGB), 16-bit PGM (masks), raw depth planes.

Depth header: magic "DPT1", u32 width LE, u32 height LE, u32 reserved=0,
followed by row-major little-endian float32.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import DrError

DEPTH_MAGIC = b"DPT1"


class ImageFormatError(DrError):
    pass


def write_ppm(path, pixels: np.ndarray) -> None:
    px = np.ascontiguousarray(pixels, dtype=np.uint8)
    if px.ndim != 3 or px.shape[2] != 3:
        raise ImageFormatError(f"expected (h, w, 3) rgb, got {px.shape}")
    h, w = px.shape[:2]
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(px.tobytes())


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic, fields, offset = _parse_pnm_header(data, b"P6", 3)
    w, h, maxval = fields
    if maxval != 255:
        raise ImageFormatError(f"P6 maxval must be 255, got {maxval}")
    need = w * h * 3
    raster = data[offset:offset + need]
    if len(raster) != need:
        raise ImageFormatError(f"truncated P6 raster: {len(raster)} of {need} bytes")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3).copy()


def write_pgm16(path, labels: np.ndarray) -> None:
    lab = np.ascontiguousarray(labels, dtype=np.uint16)
    if lab.ndim != 2:
        raise ImageFormatError(f"expected (h, w) labels, got {lab.shape}")
    h, w = lab.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        f.write(lab.astype(">u2").tobytes())


def read_pgm16(path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic, fields, offset = _parse_pnm_header(data, b"P5", 3)
    w, h, maxval = fields
    if maxval != 65535:
        raise ImageFormatError(f"P5 maxval must be 65535, got {maxval}")
    need = w * h * 2
    raster = data[offset:offset + need]
    if len(raster) != need:
        raise ImageFormatError(f"truncated P5 raster: {len(raster)} of {need} bytes")
    return np.frombuffer(raster, dtype=">u2").reshape(h, w).astype(np.uint16)


def write_depth(path, depth: np.ndarray) -> None:
    d = np.ascontiguousarray(depth, dtype="<f4")
    if d.ndim != 2:
        raise ImageFormatError(f"expected (h, w) depth, got {d.shape}")
    h, w = d.shape
    with open(path, "wb") as f:
        f.write(DEPTH_MAGIC)
        f.write(struct.pack("<III", w, h, 0))
        f.write(d.tobytes())


def read_depth(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 16 or data[:4] != DEPTH_MAGIC:
        raise ImageFormatError("bad depth header")
    w, h, reserved = struct.unpack_from("<III", data, 4)
    if reserved != 0:
        raise ImageFormatError(f"reserved field must be 0, got {reserved}")
    need = w * h * 4
    raster = data[16:16 + need]
    if len(raster) != need:
        raise ImageFormatError(f"truncated depth raster: {len(raster)} of {need} bytes")
    return np.frombuffer(raster, dtype="<f4").reshape(h, w).astype(np.float32)


def _parse_pnm_header(data: bytes, magic: bytes, n_fields: int):
    """Parse 'P6\\n<w> <h>\\n<maxval>\\n' tolerating whitespace and # comments."""
    if data[:2] != magic:
        raise ImageFormatError(f"expected {magic.decode()} magic")
    pos = 2
    fields = []
    while len(fields) < n_fields:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise ImageFormatError(f"bad header token {token!r}")
        fields.append(int(token))
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise ImageFormatError("missing whitespace after header")
    return magic, tuple(fields), pos + 1
