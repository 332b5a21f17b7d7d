"""Core 2D geometry: points, segments, homographies, and line distances.

Image convention is x rightward, y downward, with integer coordinates at
pixel centers. Segment endpoints are stored in order but every distance
here treats the pair as unordered.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSegmentError, PointAtInfinityError


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class LineSegment:
    e1: Point2
    e2: Point2

    @classmethod
    def of(cls, x1: float, y1: float, x2: float, y2: float) -> "LineSegment":
        return cls(Point2(float(x1), float(y1)), Point2(float(x2), float(y2)))

    @property
    def length(self) -> float:
        return math.hypot(self.e2.x - self.e1.x, self.e2.y - self.e1.y)

    def to_array(self) -> np.ndarray:
        """Endpoints as a (2, 2) array of (x, y) rows."""
        return np.array([[self.e1.x, self.e1.y], [self.e2.x, self.e2.y]], dtype=float)

    def reversed(self) -> "LineSegment":
        return LineSegment(self.e2, self.e1)

    def midpoint(self) -> Point2:
        return Point2((self.e1.x + self.e2.x) / 2.0, (self.e1.y + self.e2.y) / 2.0)


def segments_to_array(segments) -> np.ndarray:
    """Stack segments into an (n, 2, 2) array; empty input gives shape (0, 2, 2)."""
    if len(segments) == 0:
        return np.zeros((0, 2, 2), dtype=float)
    return np.stack([s.to_array() for s in segments])


def segments_from_array(arr) -> list[LineSegment]:
    arr = np.asarray(arr, dtype=float).reshape(-1, 2, 2)
    return [LineSegment.of(a[0, 0], a[0, 1], a[1, 0], a[1, 1]) for a in arr]


class Homography:
    """Invertible 3x3 map on homogeneous pixel coordinates.

    The matrix is stored in canonical scale (unit Frobenius norm, the
    largest-magnitude entry positive) so equal transforms have equal
    matrices and file round trips are deterministic.
    """

    __slots__ = ("m",)

    def __init__(self, m):
        m = np.array(m, dtype=float).reshape(3, 3)
        if not np.all(np.isfinite(m)):
            raise ValueError("homography entries must be finite")
        m = m / np.linalg.norm(m)
        if abs(np.linalg.det(m)) < 1e-12:
            raise ValueError("homography must be invertible")
        k = int(np.argmax(np.abs(m)))
        if m.flat[k] < 0:
            m = -m
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def __setattr__(self, name, value):
        raise AttributeError("Homography is immutable")

    def __repr__(self) -> str:
        return f"Homography({self.m.tolist()})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Homography) and np.array_equal(self.m, other.m)

    def __hash__(self):
        return hash(self.m.tobytes())

    def __matmul__(self, other: "Homography") -> "Homography":
        return Homography(self.m @ other.m)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.m))

    def allclose(self, other: "Homography", atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.m, other.m, atol=atol, rtol=0.0))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map (n, 2) points through the homography with perspective division."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        ph = np.column_stack([pts, np.ones(len(pts))])
        q = ph @ self.m.T
        w = q[:, 2]
        if np.any(np.abs(w) < 1e-12):
            raise PointAtInfinityError("warped point has near-zero homogeneous w")
        return q[:, :2] / w[:, None]

    def apply_point(self, p: Point2) -> Point2:
        q = self.apply(p.to_array()[None, :])[0]
        return Point2(float(q[0]), float(q[1]))

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    @classmethod
    def translation(cls, tx: float, ty: float) -> "Homography":
        m = np.eye(3)
        m[0, 2] = tx
        m[1, 2] = ty
        return cls(m)

    @classmethod
    def rotation(cls, angle_rad: float, center: tuple[float, float] = (0.0, 0.0)) -> "Homography":
        c, s = math.cos(angle_rad), math.sin(angle_rad)
        cx, cy = center
        m = np.array([
            [c, -s, cx - c * cx + s * cy],
            [s, c, cy - s * cx - c * cy],
            [0.0, 0.0, 1.0],
        ])
        return cls(m)

    @classmethod
    def scaling(cls, s: float, center: tuple[float, float] = (0.0, 0.0)) -> "Homography":
        cx, cy = center
        m = np.array([
            [s, 0.0, cx * (1 - s)],
            [0.0, s, cy * (1 - s)],
            [0.0, 0.0, 1.0],
        ])
        return cls(m)


def structural_distance(l1: LineSegment, l2: LineSegment) -> float:
    """Min over the two endpoint pairings of summed endpoint distances."""
    a1, a2 = l1.e1.to_array(), l1.e2.to_array()
    b1, b2 = l2.e1.to_array(), l2.e2.to_array()
    straight = np.linalg.norm(a1 - b1) + np.linalg.norm(a2 - b2)
    crossed = np.linalg.norm(a1 - b2) + np.linalg.norm(a2 - b1)
    return float(min(straight, crossed))


def _line_frame(l: LineSegment) -> tuple[np.ndarray, np.ndarray, float]:
    """Origin, unit direction, and length of the supporting line."""
    p = l.e1.to_array()
    d = l.e2.to_array() - p
    n = float(np.linalg.norm(d))
    if n < 1e-12:
        raise DegenerateSegmentError("zero-length segment has no supporting line")
    return p, d / n, n


def _perp_sum(l_base: LineSegment, l_other: LineSegment) -> float:
    """Sum of distances of l_other's endpoints to l_base's supporting line."""
    p, u, _ = _line_frame(l_base)
    total = 0.0
    for e in (l_other.e1, l_other.e2):
        v = e.to_array() - p
        total += abs(u[0] * v[1] - u[1] * v[0])
    return total


def orthogonal_distance(l1: LineSegment, l2: LineSegment) -> float:
    """Average of the two asymmetric endpoint-to-supporting-line distances."""
    return (_perp_sum(l1, l2) + _perp_sum(l2, l1)) / 2.0


def _directed_overlap(l1: LineSegment, l2: LineSegment) -> float:
    """Length of [0,1] intersected with l2's projected parameter interval on l1."""
    p, u, n = _line_frame(l1)
    t1 = float(np.dot(l2.e1.to_array() - p, u)) / n
    t2 = float(np.dot(l2.e2.to_array() - p, u)) / n
    lo, hi = min(t1, t2), max(t1, t2)
    return max(0.0, min(hi, 1.0) - max(lo, 0.0))


def segment_overlap(l1: LineSegment, l2: LineSegment) -> float:
    """Symmetrized projected-interval overlap ratio in [0, 1]."""
    return max(_directed_overlap(l1, l2), _directed_overlap(l2, l1))


def warp_segment(l: LineSegment, h: Homography) -> LineSegment:
    q = h.apply(l.to_array())
    return LineSegment.of(q[0, 0], q[0, 1], q[1, 0], q[1, 1])


def warp_segments_array(segs: np.ndarray, h: Homography) -> np.ndarray:
    """Warp an (n, 2, 2) endpoint array; raises on points at infinity."""
    segs = np.asarray(segs, dtype=float)
    flat = h.apply(segs.reshape(-1, 2))
    return flat.reshape(segs.shape)


def pairwise_structural(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(na, nb) structural distances between two (n, 2, 2) endpoint arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))
    d = a[:, None, :, None, :] - b[None, :, None, :, :]  # (na, nb, 2, 2, 2)
    d = np.linalg.norm(d, axis=-1)
    straight = d[:, :, 0, 0] + d[:, :, 1, 1]
    crossed = d[:, :, 0, 1] + d[:, :, 1, 0]
    return np.minimum(straight, crossed)


def _perp_sum_array(base: np.ndarray, other: np.ndarray) -> np.ndarray:
    """(nb, no) summed perpendicular endpoint distances to each base line."""
    p = base[:, 0, :]
    d = base[:, 1, :] - base[:, 0, :]
    n = np.linalg.norm(d, axis=-1)
    if np.any(n < 1e-12):
        raise DegenerateSegmentError("zero-length segment has no supporting line")
    u = d / n[:, None]
    v = other[None, :, :, :] - p[:, None, None, :]  # (nb, no, 2, 2)
    cross = np.abs(u[:, None, None, 0] * v[..., 1] - u[:, None, None, 1] * v[..., 0])
    return cross.sum(axis=-1)


def pairwise_orthogonal(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(na, nb) orthogonal distances; all segments must have positive length."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))
    return (_perp_sum_array(a, b) + _perp_sum_array(b, a).T) / 2.0


def _directed_overlap_array(base: np.ndarray, other: np.ndarray) -> np.ndarray:
    p = base[:, 0, :]
    d = base[:, 1, :] - base[:, 0, :]
    n = np.linalg.norm(d, axis=-1)
    if np.any(n < 1e-12):
        raise DegenerateSegmentError("zero-length segment has no supporting line")
    u = d / n[:, None]
    v = other[None, :, :, :] - p[:, None, None, :]
    t = (v * u[:, None, None, :]).sum(axis=-1) / n[:, None, None]  # (nb, no, 2)
    lo = t.min(axis=-1)
    hi = t.max(axis=-1)
    return np.clip(np.minimum(hi, 1.0) - np.maximum(lo, 0.0), 0.0, None)


def pairwise_overlap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(na, nb) symmetrized overlap ratios; positive lengths required."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))
    return np.maximum(_directed_overlap_array(a, b), _directed_overlap_array(b, a).T)
