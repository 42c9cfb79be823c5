"""Obstacle worlds: signed-distance and segment queries, random generation, world files."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np


class OutOfBoundsError(ValueError):
    pass


class GenerationError(RuntimeError):
    pass


class WorldFormatError(ValueError):
    """Malformed world file; ``where`` names the offending line or field."""

    def __init__(self, message: str, where: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass(frozen=True)
class SphereObstacle:
    center: Tuple[float, float, float]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise ValueError("sphere obstacle radius must be positive")

    def aabb(self):
        c = np.array(self.center)
        return c - self.radius, c + self.radius


@dataclass(frozen=True)
class BoxObstacle:
    min: Tuple[float, float, float]
    max: Tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "min", tuple(float(c) for c in self.min))
        object.__setattr__(self, "max", tuple(float(c) for c in self.max))
        if not all(lo < hi for lo, hi in zip(self.min, self.max)):
            raise ValueError("box obstacle needs min < max componentwise")

    def aabb(self):
        return np.array(self.min), np.array(self.max)


Obstacle = Union[SphereObstacle, BoxObstacle]


# --- brute-force kernels over structure-of-arrays obstacle sets -------------


def _sphere_sdf(p, centers, radii):
    return np.linalg.norm(p[..., None, :] - centers, axis=-1) - radii


def _box_sdf(p, lo, hi):
    half = 0.5 * (hi - lo)
    q = np.abs(p[..., None, :] - 0.5 * (hi + lo)) - half
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
    inside = np.minimum(q.max(axis=-1), 0.0)
    return outside + inside


def _segments_hit_spheres(a, b, centers, radii):
    """Boolean (S, K): closed segment s meets closed ball k."""
    ab = b - a  # (S,3)
    denom = np.einsum("si,si->s", ab, ab)[:, None]
    ap = centers[None, :, :] - a[:, None, :]  # (S,K,3)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.einsum("ski,si->sk", ap, ab) / denom
    t = np.where(denom == 0.0, 0.0, np.clip(t, 0.0, 1.0))
    foot = a[:, None, :] + t[..., None] * ab[:, None, :]
    d = np.linalg.norm(centers[None, :, :] - foot, axis=-1)
    return d <= radii[None, :]


def _segments_hit_boxes(a, b, lo, hi):
    """Boolean (S, K): closed segment s meets closed box k (slab test)."""
    ab = (b - a)[:, None, :]  # (S,1,3)
    a_ = a[:, None, :]
    flat = ab == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = (lo[None] - a_) / ab
        t1 = (hi[None] - a_) / ab
    tnear = np.where(flat, -np.inf, np.minimum(t0, t1))
    tfar = np.where(flat, np.inf, np.maximum(t0, t1))
    inside_flat = np.where(flat, (a_ >= lo[None]) & (a_ <= hi[None]), True)
    enter = np.maximum(tnear.max(axis=-1), 0.0)
    leave = np.minimum(tfar.min(axis=-1), 1.0)
    return inside_flat.all(axis=-1) & (enter <= leave)


class ObstacleGrid:
    """Uniform grid marking which obstacle bounding boxes touch each cell.

    Queries gather candidate obstacles from the cells a query box touches; any
    obstacle outside those cells cannot affect the answer.
    """

    def __init__(self, lo, hi, boxes_lo, boxes_hi, cell: float):
        self.lo = tuple(float(v) for v in lo)
        self.cell = float(cell)
        self.shape = tuple(max(int(math.ceil((h - l) / self.cell)), 1) for l, h in zip(self.lo, hi))
        self.occupancy = np.zeros(self.shape + (len(boxes_lo),), dtype=bool)
        for k, (blo, bhi) in enumerate(zip(boxes_lo, boxes_hi)):
            sl = self._slices(blo, bhi)
            self.occupancy[sl + (k,)] = True

    def _slices(self, qlo, qhi):
        out = []
        for q0, q1, l, n in zip(qlo, qhi, self.lo, self.shape):
            i0 = min(max(int(math.floor((q0 - l) / self.cell)), 0), n - 1)
            i1 = min(max(int(math.floor((q1 - l) / self.cell)), 0), n - 1)
            out.append(slice(i0, i1 + 1))
        return tuple(out)

    def candidates(self, qlo, qhi) -> np.ndarray:
        block = self.occupancy[self._slices(qlo, qhi)]
        return np.flatnonzero(block.any(axis=(0, 1, 2)))


class Environment:
    """Axis-aligned world box with sphere and box obstacles. Immutable."""

    def __init__(self, bounds_min, bounds_max, obstacles: Sequence[Obstacle] = (), meta: Optional[dict] = None):
        self.bounds_min = tuple(float(v) for v in bounds_min)
        self.bounds_max = tuple(float(v) for v in bounds_max)
        if not all(lo < hi for lo, hi in zip(self.bounds_min, self.bounds_max)):
            raise ValueError("bounds need min < max componentwise")
        self.obstacles: Tuple[Obstacle, ...] = tuple(obstacles)
        meta = meta or {}
        self.meta = {"seed": meta.get("seed"), "generator": meta.get("generator")}
        self._lo = np.array(self.bounds_min)
        self._hi = np.array(self.bounds_max)
        for ob in self.obstacles:
            olo, ohi = ob.aabb()
            if np.any(olo > self._hi) or np.any(ohi < self._lo):
                raise ValueError(f"obstacle {ob} does not intersect the world bounds")

        self._sph_idx = np.array([k for k, o in enumerate(self.obstacles) if isinstance(o, SphereObstacle)], dtype=np.intp)
        self._box_idx = np.array([k for k, o in enumerate(self.obstacles) if isinstance(o, BoxObstacle)], dtype=np.intp)
        sph = [self.obstacles[k] for k in self._sph_idx]
        box = [self.obstacles[k] for k in self._box_idx]
        self.sph_c = np.array([o.center for o in sph], dtype=float).reshape(-1, 3)
        self.sph_r = np.array([o.radius for o in sph], dtype=float)
        self.box_lo = np.array([o.min for o in box], dtype=float).reshape(-1, 3)
        self.box_hi = np.array([o.max for o in box], dtype=float).reshape(-1, 3)

        extent = self._hi - self._lo
        cell = max(float(extent.max()) / 16.0, 1e-6)
        self.sph_grid = ObstacleGrid(self._lo, self._hi, self.sph_c - self.sph_r[:, None], self.sph_c + self.sph_r[:, None], cell)
        self.box_grid = ObstacleGrid(self._lo, self._hi, self.box_lo, self.box_hi, cell)

    # -- basic properties --------------------------------------------------

    @property
    def extent(self) -> np.ndarray:
        return self._hi - self._lo

    @property
    def volume(self) -> float:
        return float(np.prod(self.extent))

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self._lo) and np.all(p <= self._hi))

    def _check_inside(self, p):
        if not self.contains(p):
            raise OutOfBoundsError(f"point {np.asarray(p).tolist()} lies outside the world bounds")

    def face_distance(self, p) -> float:
        p = np.asarray(p, dtype=float)
        return float(min((p - self._lo).min(), (self._hi - p).min()))

    # -- queries -------------------------------------------------------------

    def distance_to_obstacles(self, p) -> float:
        """Signed clearance at ``p``: negative inside an obstacle, capped by the
        distance to the world's faces."""
        p = np.asarray(p, dtype=float)
        self._check_inside(p)
        best = self.face_distance(p)
        # obstacles farther than the face distance cannot lower the minimum
        qlo, qhi = p - best, p + best
        ks = self.sph_grid.candidates(qlo, qhi)
        if len(ks):
            best = min(best, float(_sphere_sdf(p, self.sph_c[ks], self.sph_r[ks]).min()))
        kb = self.box_grid.candidates(qlo, qhi)
        if len(kb):
            best = min(best, float(_box_sdf(p, self.box_lo[kb], self.box_hi[kb]).min()))
        return best

    def distance_to_obstacles_brute(self, p) -> float:
        p = np.asarray(p, dtype=float)
        self._check_inside(p)
        best = self.face_distance(p)
        if len(self.sph_r):
            best = min(best, float(_sphere_sdf(p, self.sph_c, self.sph_r).min()))
        if len(self.box_lo):
            best = min(best, float(_box_sdf(p, self.box_lo, self.box_hi).min()))
        return best

    def segment_obstacle_free(self, a, b) -> bool:
        """True iff the closed segment [a, b] misses every closed obstacle."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        qlo, qhi = np.minimum(a, b), np.maximum(a, b)
        ks = self.sph_grid.candidates(qlo, qhi)
        if len(ks) and _segments_hit_spheres(a[None], b[None], self.sph_c[ks], self.sph_r[ks]).any():
            return False
        kb = self.box_grid.candidates(qlo, qhi)
        if len(kb) and _segments_hit_boxes(a[None], b[None], self.box_lo[kb], self.box_hi[kb]).any():
            return False
        return True

    def segments_obstacle_free(self, a, b) -> np.ndarray:
        """Batched :meth:`segment_obstacle_free` for (S,3) endpoint arrays, prefiltered by the union box."""
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.atleast_2d(np.asarray(b, dtype=float))
        a, b = np.broadcast_arrays(a, b)
        free = np.ones(len(a), dtype=bool)
        if len(a) == 0:
            return free
        qlo = np.minimum(a.min(axis=0), b.min(axis=0))
        qhi = np.maximum(a.max(axis=0), b.max(axis=0))
        ks = self.sph_grid.candidates(qlo, qhi)
        if len(ks):
            free &= ~_segments_hit_spheres(a, b, self.sph_c[ks], self.sph_r[ks]).any(axis=1)
        kb = self.box_grid.candidates(qlo, qhi)
        if len(kb):
            free &= ~_segments_hit_boxes(a, b, self.box_lo[kb], self.box_hi[kb]).any(axis=1)
        return free

    def segments_obstacle_free_brute(self, a, b) -> np.ndarray:
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.atleast_2d(np.asarray(b, dtype=float))
        a, b = np.broadcast_arrays(a, b)
        free = np.ones(len(a), dtype=bool)
        if len(self.sph_r):
            free &= ~_segments_hit_spheres(a, b, self.sph_c, self.sph_r).any(axis=1)
        if len(self.box_lo):
            free &= ~_segments_hit_boxes(a, b, self.box_lo, self.box_hi).any(axis=1)
        return free

    def point_free(self, p) -> bool:
        """True iff ``p`` is in bounds and outside every closed obstacle."""
        return self.contains(p) and self._outside_all(np.asarray(p, dtype=float))

    def _outside_all(self, p):
        if len(self.sph_r) and np.any(_sphere_sdf(p, self.sph_c, self.sph_r) <= 0.0):
            return False
        if len(self.box_lo) and np.any(_box_sdf(p, self.box_lo, self.box_hi) <= 0.0):
            return False
        return True

    def __eq__(self, other):
        if not isinstance(other, Environment):
            return NotImplemented
        return (
            self.bounds_min == other.bounds_min
            and self.bounds_max == other.bounds_max
            and self.obstacles == other.obstacles
            and self.meta == other.meta
        )

    def __repr__(self):
        return f"Environment(bounds={self.bounds_min}..{self.bounds_max}, obstacles={len(self.obstacles)})"


# --- random worlds ------------------------------------------------------------


def default_endpoints(size, origin=(0.0, 0.0, 0.0), inset: float = 2.0) -> Tuple[np.ndarray, np.ndarray]:
    """Start and goal on opposite x-faces at mid-height, ``inset`` meters in."""
    o = np.asarray(origin, dtype=float)
    sx, sy, sz = (float(v) for v in size)
    return o + [inset, sy / 2, sz / 2], o + [sx - inset, sy / 2, sz / 2]


def endpoints_for(env: "Environment") -> Tuple[np.ndarray, np.ndarray]:
    return default_endpoints(env.extent, env.bounds_min)


@dataclass
class WorldGenConfig:
    size: Tuple[float, float, float] = (25.0, 25.0, 3.0)
    obstacle_count: int = 20
    footprint: Tuple[float, float, float] = (1.0, 1.0, 3.0)
    seed: int = 0
    shape: str = "box"
    keep_out_radius: float = 2.0
    keep_out: Optional[List[Tuple[float, float, float]]] = None

    def __post_init__(self):
        if self.obstacle_count < 0:
            raise ValueError("obstacle_count must be >= 0")
        if any(s <= 0 for s in self.size) or any(f <= 0 for f in self.footprint):
            raise ValueError("size and footprint extents must be positive")
        if self.shape not in ("box", "sphere"):
            raise ValueError(f"unknown obstacle shape {self.shape!r}")


def _ball_meets_obstacle(center, radius, ob: Obstacle) -> bool:
    c = np.asarray(center, dtype=float)
    if isinstance(ob, SphereObstacle):
        return float(np.linalg.norm(c - np.array(ob.center))) <= radius + ob.radius
    lo, hi = ob.aabb()
    return float(np.linalg.norm(c - np.clip(c, lo, hi))) <= radius


def generate_world(cfg: WorldGenConfig) -> Environment:
    """Scatter ``cfg.obstacle_count`` obstacles uniformly, keeping the start/goal region clear."""
    size = np.array(cfg.size, dtype=float)
    foot = np.array(cfg.footprint, dtype=float)
    keep_out = cfg.keep_out if cfg.keep_out is not None else list(default_endpoints(size))
    rng = np.random.default_rng(cfg.seed)
    pillars = cfg.shape == "box" and foot[2] == size[2]
    obstacles: List[Obstacle] = []
    attempts = 0
    while len(obstacles) < cfg.obstacle_count:
        if attempts >= 10 * cfg.obstacle_count:
            raise GenerationError(
                f"placed {len(obstacles)} of {cfg.obstacle_count} obstacles after {attempts} attempts"
            )
        attempts += 1
        c = rng.uniform(0.0, 1.0, size=3) * size
        if cfg.shape == "sphere":
            ob: Obstacle = SphereObstacle(tuple(c), float(foot.min()) / 2)
        else:
            lo, hi = c - foot / 2, c + foot / 2
            if pillars:
                lo[2], hi[2] = 0.0, size[2]
            ob = BoxObstacle(tuple(lo), tuple(hi))
        if any(_ball_meets_obstacle(k, cfg.keep_out_radius, ob) for k in keep_out):
            continue
        obstacles.append(ob)
    meta = {"seed": int(cfg.seed), "generator": f"uniform-{cfg.shape}"}
    return Environment((0.0, 0.0, 0.0), tuple(size), obstacles, meta)


# --- world files --------------------------------------------------------------


def world_to_dict(env: Environment) -> dict:
    obs = []
    for ob in env.obstacles:
        if isinstance(ob, SphereObstacle):
            obs.append({"type": "sphere", "center": list(ob.center), "radius": ob.radius})
        else:
            obs.append({"type": "box", "min": list(ob.min), "max": list(ob.max)})
    meta = {"seed": env.meta.get("seed"), "generator": env.meta.get("generator")}
    return {
        "bounds": {"min": list(env.bounds_min), "max": list(env.bounds_max)},
        "obstacles": obs,
        "meta": meta,
    }


def dumps_world(env: Environment) -> str:
    return json.dumps(world_to_dict(env), indent=2) + "\n"


def save_world(env: Environment, path) -> None:
    Path(path).write_text(dumps_world(env))


def _vec3(obj, where):
    if not isinstance(obj, list) or len(obj) != 3:
        raise WorldFormatError("expected a list of 3 numbers", where)
    for k, v in enumerate(obj):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise WorldFormatError(f"expected a finite number, got {v!r}", f"{where}[{k}]")
    return tuple(float(v) for v in obj)


def _field(obj, key, where):
    if not isinstance(obj, dict):
        raise WorldFormatError("expected an object", where)
    if key not in obj:
        raise WorldFormatError(f"missing field {key!r}", where)
    return obj[key]


def world_from_dict(data) -> Environment:
    bounds = _field(data, "bounds", "$")
    lo = _vec3(_field(bounds, "min", "bounds"), "bounds.min")
    hi = _vec3(_field(bounds, "max", "bounds"), "bounds.max")
    raw = data.get("obstacles", [])
    if not isinstance(raw, list):
        raise WorldFormatError("expected a list", "obstacles")
    obstacles: List[Obstacle] = []
    for k, item in enumerate(raw):
        where = f"obstacles[{k}]"
        kind = _field(item, "type", where)
        try:
            if kind == "sphere":
                r = _field(item, "radius", where)
                if isinstance(r, bool) or not isinstance(r, (int, float)):
                    raise WorldFormatError(f"expected a number, got {r!r}", f"{where}.radius")
                obstacles.append(SphereObstacle(_vec3(_field(item, "center", where), f"{where}.center"), float(r)))
            elif kind == "box":
                obstacles.append(
                    BoxObstacle(_vec3(_field(item, "min", where), f"{where}.min"), _vec3(_field(item, "max", where), f"{where}.max"))
                )
            else:
                raise WorldFormatError(f"unknown obstacle type {kind!r}", f"{where}.type")
        except ValueError as exc:
            if isinstance(exc, WorldFormatError):
                raise
            raise WorldFormatError(str(exc), where) from None
    meta = data.get("meta") or {}
    if not isinstance(meta, dict):
        raise WorldFormatError("expected an object", "meta")
    try:
        return Environment(lo, hi, obstacles, {"seed": meta.get("seed"), "generator": meta.get("generator")})
    except ValueError as exc:
        raise WorldFormatError(str(exc), "bounds") from None


def loads_world(text: str) -> Environment:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorldFormatError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    return world_from_dict(data)


def load_world(path) -> Environment:
    return loads_world(Path(path).read_text())
