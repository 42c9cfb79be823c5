"""Exact 3-D primitives: spheres, sphere-sphere lenses, segment distances."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

TOL = 1e-9


class InvalidWeightsError(ValueError):
    """Convex-combination weights are negative, mismatched or do not sum to one."""


def as_point(p) -> np.ndarray:
    """Return ``p`` as a finite float64 vector of length 3."""
    arr = np.asarray(p, dtype=float).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"point has non-finite coordinates: {arr!r}")
    return arr


@dataclass(frozen=True, eq=False)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_point(self.center).copy()
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        r = float(self.radius)
        if not (math.isfinite(r) and r > 0.0):
            raise ValueError(f"sphere radius must be finite and positive, got {r}")
        object.__setattr__(self, "radius", r)

    @property
    def volume(self) -> float:
        return sphere_volume(self.radius)

    def __eq__(self, other):
        if not isinstance(other, Sphere):
            return NotImplemented
        return self.radius == other.radius and bool(np.array_equal(self.center, other.center))

    def __repr__(self):
        x, y, z = self.center
        return f"Sphere(center=({x!r}, {y!r}, {z!r}), radius={self.radius!r})"


@dataclass(frozen=True)
class Lens:
    """Intersection solid of two spheres and the disc bounding it."""

    volume: float
    circle_center: np.ndarray
    circle_radius: float
    plane_normal: np.ndarray


def sphere_volume(r):
    return 4.0 / 3.0 * math.pi * r**3


def _cap_volume(r, h):
    return math.pi * h * h * (3.0 * r - h) / 3.0


def lens_volume(r1: float, r2: float, d: float) -> float:
    """Volume of the intersection of two spheres with radii r1, r2 at center distance d.

    Tangent or separated spheres give 0; nested spheres give the smaller ball.
    """
    # canonical order makes the result exactly symmetric in (r1, r2)
    big, small = (r1, r2) if r1 >= r2 else (r2, r1)
    if d >= big + small:
        return 0.0
    if d <= big - small:
        return sphere_volume(small)
    a = (d * d + big * big - small * small) / (2.0 * d)
    return _cap_volume(big, big - a) + _cap_volume(small, small - (d - a))


def lens_volumes(c1: np.ndarray, r1: np.ndarray, c2: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """Vectorised :func:`lens_volume` over broadcastable arrays of centers and radii."""
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    diff = np.asarray(c1, dtype=float) - np.asarray(c2, dtype=float)
    d = np.sqrt(np.einsum("...i,...i->...", diff, diff))
    big = np.maximum(r1, r2)
    small = np.minimum(r1, r2)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = (d * d + big * big - small * small) / (2.0 * d)
        hb = big - a
        hs = small - (d - a)
        v = math.pi * hb * hb * (3.0 * big - hb) / 3.0 + math.pi * hs * hs * (3.0 * small - hs) / 3.0
    v = np.where(d <= big - small, 4.0 / 3.0 * math.pi * small**3, v)
    return np.where(d >= big + small, 0.0, v)


def lens_of(a: Sphere, b: Sphere) -> Optional[Lens]:
    """Lens shared by two spheres, or ``None`` when they do not overlap.

    The disc lies in the radical plane, orthogonal to the center line. For
    nested spheres the disc is the great circle of the smaller sphere.
    """
    axis = b.center - a.center
    d = float(np.sqrt(axis @ axis))
    r1, r2 = a.radius, b.radius
    if d >= r1 + r2:
        return None
    volume = lens_volume(r1, r2, d)
    normal = axis / d if d > 0.0 else np.array([1.0, 0.0, 0.0])
    if d <= abs(r1 - r2):
        inner = a if r1 <= r2 else b
        return Lens(volume, inner.center.copy(), inner.radius, normal)
    # offset of the radical plane from a.center along the axis
    t = (d * d + r1 * r1 - r2 * r2) / (2.0 * d)
    rho = math.sqrt(max(r1 * r1 - t * t, 0.0))
    return Lens(volume, a.center + t * normal, rho, normal)


def segment_point_distance(p, a, b) -> float:
    """Euclidean distance from ``p`` to the closed segment [a, b]."""
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0.0 else min(max(float((p - a) @ ab) / denom, 0.0), 1.0)
    foot = a + t * ab
    return float(np.linalg.norm(p - foot))


def convex_combination(points: Sequence, weights: Sequence[float]) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    w = np.asarray(weights, dtype=float)
    if pts.ndim != 2 or len(pts) != len(w):
        raise InvalidWeightsError(f"got {len(w)} weights for {len(pts)} points")
    if np.any(w < 0.0) or abs(float(w.sum()) - 1.0) > TOL:
        raise InvalidWeightsError(f"weights must be nonnegative and sum to 1, got {w.tolist()}")
    return w @ pts


def polyline_length(points) -> float:
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())
