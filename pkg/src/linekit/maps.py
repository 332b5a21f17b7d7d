"""Tensor maps, bilinear sampling, junction decoding, warping, and file I/O.

A ``TensorMap`` is an immutable h x w x c grid of 32-bit floats. Validity
masks returned by :func:`warp_map` are plain ``(h, w)`` boolean arrays.

LMAP binary format (bit-exact, little-endian throughout):
magic ``LMAP``, u16 version = 1, u32 height, u32 width, u32 channels,
then ``h*w*c`` float32 values, row-major with channels fastest.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import MapFormatError, OutOfBoundsError, SizeMismatchError
from .geom import Homography

_LMAP_MAGIC = b"LMAP"
_LMAP_VERSION = 1


class TensorMap:
    """Immutable image-aligned grid of float32 values."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.ascontiguousarray(data, dtype=np.float32)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise ValueError("tensor map data must be h x w or h x w x c")
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor map values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("TensorMap is immutable")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @classmethod
    def constant(cls, height: int, width: int, channels: int = 1, value: float = 0.0) -> "TensorMap":
        return cls(np.full((height, width, channels), value, dtype=np.float32))


def bilinear_sample(tmap: TensorMap, p) -> np.ndarray:
    """Bilinear blend of the four texels around p = (x, y), per channel.

    p must lie in [0, w-1] x [0, h-1].
    """
    return bilinear_sample_many(tmap, np.asarray(p, dtype=float).reshape(1, 2))[0]


def bilinear_sample_many(tmap: TensorMap, points: np.ndarray) -> np.ndarray:
    """Vectorized bilinear sampling of (n, 2) points; returns (n, c)."""
    pts = np.asarray(points, dtype=float)
    h, w = tmap.height, tmap.width
    x, y = pts[:, 0], pts[:, 1]
    if np.any(x < 0) or np.any(x > w - 1) or np.any(y < 0) or np.any(y > h - 1):
        raise OutOfBoundsError("sample location outside [0, w-1] x [0, h-1]")
    x0 = np.clip(np.floor(x).astype(int), 0, w - 1)
    y0 = np.clip(np.floor(y).astype(int), 0, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (x - x0)[:, None]
    fy = (y - y0)[:, None]
    d = tmap.data
    v00 = d[y0, x0].astype(np.float64)
    v01 = d[y0, x1].astype(np.float64)
    v10 = d[y1, x0].astype(np.float64)
    v11 = d[y1, x1].astype(np.float64)
    top = v00 * (1 - fx) + v01 * fx
    bot = v10 * (1 - fx) + v11 * fx
    return top * (1 - fy) + bot * fy


def decode_junction_map(coarse: TensorMap) -> TensorMap:
    """Expand a coarse 65-channel logit grid into a full-resolution probability map.

    Each cell gets a softmax over its 65 logits; the last channel is a
    "no junction" dustbin and is dropped, the remaining 64 fill the cell's
    8x8 patch row-major (channel k lands at patch pixel x = k % 8, y = k // 8).
    """
    if coarse.channels != 65:
        raise ValueError(f"expected 65 channels, got {coarse.channels}")
    logits = coarse.data.astype(np.float64)
    logits = logits - logits.max(axis=2, keepdims=True)
    e = np.exp(logits)
    probs = e / e.sum(axis=2, keepdims=True)
    hc, wc = coarse.height, coarse.width
    patch = probs[:, :, :64].reshape(hc, wc, 8, 8)
    full = patch.transpose(0, 2, 1, 3).reshape(hc * 8, wc * 8)
    return TensorMap(full.astype(np.float32))


def warp_map(tmap: TensorMap, h: Homography, out_h: int, out_w: int) -> tuple[TensorMap, np.ndarray]:
    """Inverse-warp a map through h onto an out_h x out_w grid.

    Output pixel p takes the bilinear value of the source map at h^-1(p);
    out-of-bounds sources give 0 with a False entry in the returned mask.
    """
    hinv = h.inverse().m
    xs, ys = np.meshgrid(np.arange(out_w, dtype=float), np.arange(out_h, dtype=float))
    ones = np.ones_like(xs)
    q = np.stack([xs, ys, ones], axis=-1) @ hinv.T
    w_h = q[..., 2]
    safe = np.abs(w_h) > 1e-12
    sx = np.where(safe, q[..., 0] / np.where(safe, w_h, 1.0), -1.0)
    sy = np.where(safe, q[..., 1] / np.where(safe, w_h, 1.0), -1.0)
    valid = safe & (sx >= 0) & (sx <= tmap.width - 1) & (sy >= 0) & (sy <= tmap.height - 1)
    pts = np.column_stack([sx[valid], sy[valid]])
    out = np.zeros((out_h, out_w, tmap.channels), dtype=np.float32)
    if len(pts):
        out[valid] = bilinear_sample_many(tmap, pts).astype(np.float32)
    return TensorMap(out), valid


def require_same_size(a: TensorMap, b: TensorMap) -> None:
    if (a.height, a.width) != (b.height, b.width):
        raise SizeMismatchError(
            f"map sizes differ: {a.height}x{a.width} vs {b.height}x{b.width}"
        )


def write_map(tmap: TensorMap, path) -> None:
    header = _LMAP_MAGIC + struct.pack(
        "<HIII", _LMAP_VERSION, tmap.height, tmap.width, tmap.channels
    )
    payload = np.ascontiguousarray(tmap.data, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_map(path) -> TensorMap:
    raw = Path(path).read_bytes()
    if len(raw) < 18:
        raise MapFormatError(f"{path}: file shorter than the LMAP header")
    if raw[:4] != _LMAP_MAGIC:
        raise MapFormatError(f"{path}: bad magic {raw[:4]!r}")
    version, h, w, c = struct.unpack("<HIII", raw[4:18])
    if version != _LMAP_VERSION:
        raise MapFormatError(f"{path}: unsupported version {version}")
    expected = h * w * c * 4
    if len(raw) - 18 != expected:
        raise MapFormatError(
            f"{path}: payload holds {(len(raw) - 18) // 4} floats, header claims {h * w * c}"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=18).reshape(h, w, c)
    if not np.all(np.isfinite(data)):
        raise MapFormatError(f"{path}: non-finite values in payload")
    return TensorMap(data)


def load_descriptor_map(path) -> TensorMap:
    """Read a descriptor map and L2-normalize every pixel's channel vector."""
    return normalize_descriptors(read_map(path))


def normalize_descriptors(tmap: TensorMap) -> TensorMap:
    d = tmap.data.astype(np.float64)
    n = np.linalg.norm(d, axis=2, keepdims=True)
    n = np.where(n < 1e-12, 1.0, n)
    return TensorMap((d / n).astype(np.float32))


def write_pgm(tmap: TensorMap, path) -> None:
    """Write a 1-channel map with values in [0, 1] as binary 8-bit PGM."""
    if tmap.channels != 1:
        raise ValueError("PGM output requires a single channel")
    g = np.clip(np.rint(tmap.data[:, :, 0] * 255.0), 0, 255).astype(np.uint8)
    header = f"P5\n{tmap.width} {tmap.height}\n255\n".encode()
    Path(path).write_bytes(header + g.tobytes())


def read_pgm(path) -> TensorMap:
    raw = Path(path).read_bytes()
    if raw[:2] != b"P5":
        raise MapFormatError(f"{path}: not a binary PGM (P5) file")
    fields: list[bytes] = []
    i = 2
    while len(fields) < 3:
        while i < len(raw) and raw[i : i + 1].isspace():
            i += 1
        if i < len(raw) and raw[i : i + 1] == b"#":
            while i < len(raw) and raw[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < len(raw) and not raw[i : i + 1].isspace():
            i += 1
        fields.append(raw[start:i])
    i += 1  # single whitespace after maxval
    try:
        w, h, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise MapFormatError(f"{path}: malformed PGM header") from exc
    if maxval != 255:
        raise MapFormatError(f"{path}: only 8-bit PGM supported")
    if len(raw) - i < w * h:
        raise MapFormatError(f"{path}: truncated PGM payload")
    g = np.frombuffer(raw, dtype=np.uint8, count=w * h, offset=i).reshape(h, w)
    return TensorMap(g.astype(np.float32) / 255.0)


def write_ppm(rgb: np.ndarray, path) -> None:
    """Write an (h, w, 3) uint8 array as binary PPM (P6)."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("PPM output requires an h x w x 3 array")
    header = f"P6\n{rgb.shape[1]} {rgb.shape[0]}\n255\n".encode()
    Path(path).write_bytes(header + rgb.tobytes())
