"""Homotopic path sets from a sphere chain.

A solved chain of overlapping spheres is turned into M boundary polylines
that pass through equally spaced points on the rim of every intersection
disc. Any convex combination of the boundary polylines stays inside the
chain, so the whole family is homotopic by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .environment import Environment
from .geometry import TOL, InvalidWeightsError, Sphere, lens_of, polyline_length, sphere_volume


class DegenerateGapError(ValueError):
    pass


class BoundaryInfeasibleError(ValueError):
    pass


class ExtractionError(ValueError):
    pass


class NoDataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Terminal:
    vertices: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if v.ndim != 2 or v.shape[1] != 3 or len(v) < 1:
            raise ValueError("terminal needs at least one 3-D vertex")
        if not np.all(np.isfinite(v)):
            raise ValueError("terminal vertices must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def M(self) -> int:
        return len(self.vertices)

    @property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)


def regular_terminal(center, normal, radius: float, M: int) -> Terminal:
    """Regular M-gon of circumradius ``radius`` in the plane through ``center`` orthogonal to ``normal``."""
    c = np.asarray(center, dtype=float)
    if M == 1:
        return Terminal(c[None])
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    u = _perpendicular(n)
    w = np.cross(n, u)
    ang = 2.0 * np.pi * np.arange(M) / M
    return Terminal(c + radius * (np.cos(ang)[:, None] * u + np.sin(ang)[:, None] * w))


def terminals_disjoint(a: Terminal, b: Terminal) -> bool:
    """True iff the convex hulls of the two vertex sets do not meet."""
    from scipy.optimize import linprog

    na, nb = a.M, b.M
    # find lambda, mu on simplices with sum lambda*a = sum mu*b
    A_eq = np.zeros((5, na + nb))
    A_eq[:3, :na] = a.vertices.T
    A_eq[:3, na:] = -b.vertices.T
    A_eq[3, :na] = 1.0
    A_eq[4, na:] = 1.0
    b_eq = np.array([0.0, 0.0, 0.0, 1.0, 1.0])
    res = linprog(np.zeros(na + nb), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return res.status == 2


@dataclass(frozen=True)
class IntersectionRecord:
    q_o: np.ndarray
    disc_radius: float
    plane_normal: np.ndarray
    lens_volume: float


@dataclass(eq=False)
class HomotopicPathSet:
    sigma_c: List[Sphere]
    sigma_o: np.ndarray  # (m+1, 3)
    boundary_paths: np.ndarray  # (M, m+1, 3)
    records: List[IntersectionRecord]
    anchor: str = "sphere_center"

    @property
    def M(self) -> int:
        return self.boundary_paths.shape[0]

    @property
    def m(self) -> int:
        return len(self.sigma_c)


def extract_center_path(tree, goal_id: int, goal_sphere: Optional[Sphere] = None) -> List[Sphere]:
    """Root-to-``goal_id`` sphere sequence, optionally closed by ``goal_sphere``."""
    if not 0 <= goal_id < len(tree):
        raise ExtractionError(f"node {goal_id} is not in the tree")
    ids = tree.path_to(goal_id)
    if tree.parents[ids[0]] >= 0 or ids[0] != 0:
        raise ExtractionError(f"node {goal_id} is not connected to the root")
    chain = [tree.sphere(i) for i in ids]
    if goal_sphere is not None:
        chain.append(goal_sphere)
    return chain


def _perpendicular(n: np.ndarray) -> np.ndarray:
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(n)))] = 1.0
    u = axis - (axis @ n) * n
    return u / np.linalg.norm(u)


def _transport(u: np.ndarray, n0: np.ndarray, n1: np.ndarray) -> np.ndarray:
    """Carry ``u`` (orthogonal to n0) by the smallest rotation taking n0 to n1."""
    axis = np.cross(n0, n1)
    s = float(np.linalg.norm(axis))
    c = float(n0 @ n1)
    if s > 1e-12:
        k = axis / s
        u = u * c + np.cross(k, u) * s + k * (k @ u) * (1.0 - c)
    u = u - (u @ n1) * n1
    norm = float(np.linalg.norm(u))
    if norm < 1e-9:
        return _perpendicular(n1)
    return u / norm


def _angles(points, origin, u, w):
    rel = points - origin
    return np.arctan2(rel @ w, rel @ u)


def _wrap(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def build_boundary_paths(
    sigma_c: Sequence[Sphere],
    terminals: Tuple[Terminal, Terminal],
    env: Optional[Environment] = None,
    anchor: str = "sphere_center",
) -> HomotopicPathSet:
    """Boundary paths through the rims of the discs shared by consecutive spheres.

    Disc points are equally spaced and placed with a rotation-minimizing frame,
    so boundary path k keeps its angular slot from disc to disc. Boundary path
    k starts at vertex k of the first terminal and ends at the vertex of the
    second terminal with the same angular rank about the path direction.

    ``anchor`` picks the end points of the center path: ``"sphere_center"``
    uses the first and last sphere centers, ``"terminal_centroid"`` the
    terminal centroids. When ``env`` is given every boundary segment is
    collision checked.
    """
    t0, t1 = terminals
    if t0.M != t1.M:
        raise ValueError(f"terminals have {t0.M} and {t1.M} vertices")
    if anchor not in ("sphere_center", "terminal_centroid"):
        raise ValueError(f"unknown anchor {anchor!r}")
    if len(sigma_c) < 2:
        raise ValueError("need at least two spheres")
    M = t0.M
    m = len(sigma_c)
    if env is not None:
        for t in (t0, t1):
            if not all(env.point_free(v) for v in t.vertices):
                raise ValueError("terminal vertex outside free space")

    records = []
    for i in range(1, m):
        lens = lens_of(sigma_c[i - 1], sigma_c[i])
        if lens is None or lens.circle_radius <= TOL:
            raise DegenerateGapError(f"spheres {i - 1} and {i} share no disc")
        records.append(IntersectionRecord(lens.circle_center, lens.circle_radius, lens.plane_normal, lens.volume))

    normals = [r.plane_normal for r in records]
    frames = [_perpendicular(normals[0])]
    for i in range(1, len(records)):
        frames.append(_transport(frames[-1], normals[i - 1], normals[i]))

    # angular slot of each boundary path, aligned with the first terminal
    u0, n0 = frames[0], normals[0]
    w0 = np.cross(n0, u0)
    alpha = _angles(t0.vertices, t0.centroid, u0, w0)
    order0 = np.argsort(alpha, kind="stable")
    rank0 = np.empty(M, dtype=int)
    rank0[order0] = np.arange(M)
    phase = alpha[order0[0]]
    slot_angle = phase + 2.0 * np.pi * rank0 / M  # per boundary path

    paths = np.empty((M, m + 1, 3))
    paths[:, 0] = t0.vertices
    for i, (rec, u, n) in enumerate(zip(records, frames, normals), start=1):
        if M == 1:
            paths[0, i] = rec.q_o
            continue
        w = np.cross(n, u)
        paths[:, i] = rec.q_o + rec.disc_radius * (np.cos(slot_angle)[:, None] * u + np.sin(slot_angle)[:, None] * w)

    # match the second terminal cyclically by angular order
    u1, n1 = frames[-1], normals[-1]
    w1 = np.cross(n1, u1)
    beta = _angles(t1.vertices, t1.centroid, u1, w1)
    order1 = np.argsort(beta, kind="stable")
    slots = phase + 2.0 * np.pi * np.arange(M) / M
    shifts = [np.abs(_wrap(slots - beta[np.roll(order1, -c)])).sum() for c in range(M)]
    c = int(np.argmin(shifts))
    end_vertex = np.roll(order1, -c)[rank0]
    paths[:, m] = t1.vertices[end_vertex]

    sigma_o = np.empty((m + 1, 3))
    sigma_o[1:m] = [r.q_o for r in records]
    if anchor == "sphere_center":
        sigma_o[0], sigma_o[m] = sigma_c[0].center, sigma_c[-1].center
    else:
        sigma_o[0], sigma_o[m] = t0.centroid, t1.centroid

    if env is not None:
        for k in range(M):
            free = env.segments_obstacle_free(paths[k, :-1], paths[k, 1:])
            if not free.all():
                seg = int(np.flatnonzero(~free)[0])
                raise BoundaryInfeasibleError(f"boundary path {k} segment {seg} hits an obstacle")
    return HomotopicPathSet(list(sigma_c), sigma_o, paths, records, anchor)


def _check_theta(theta, M):
    w = np.asarray(theta, dtype=float)
    if w.shape != (M,):
        raise InvalidWeightsError(f"expected {M} weights, got shape {w.shape}")
    if np.any(w < 0.0) or abs(float(w.sum()) - 1.0) > TOL:
        raise InvalidWeightsError(f"weights must be nonnegative and sum to 1, got {w.tolist()}")
    return w


def interpolate(path_set: HomotopicPathSet, theta) -> np.ndarray:
    """Pointwise convex combination of the boundary paths."""
    w = _check_theta(theta, path_set.M)
    return np.tensordot(w, path_set.boundary_paths, axes=1)


def sample_homotopic_paths(path_set: HomotopicPathSet, l: int, rng: np.random.Generator) -> List[np.ndarray]:
    """``l`` paths with weights drawn uniformly from the simplex."""
    if l < 1:
        raise ValueError("l must be >= 1")
    thetas = rng.dirichlet(np.ones(path_set.M), size=l)
    return [interpolate(path_set, th / th.sum()) for th in thetas]


# --- metrics ---------------------------------------------------------------------


@dataclass(frozen=True)
class PathMetrics:
    apl: float
    mgv: float
    vsd: float


@dataclass
class SolvedPath:
    """Inputs for the metrics: the path points and the sphere radii along it."""

    env: Environment
    points: np.ndarray
    radii: np.ndarray


def solved_from_path_set(env: Environment, path_set: HomotopicPathSet) -> SolvedPath:
    return SolvedPath(env, path_set.sigma_o, np.array([s.radius for s in path_set.sigma_c]))


def path_metrics(run: SolvedPath) -> PathMetrics:
    clearance = np.array([run.env.distance_to_obstacles(p) for p in run.points])
    return PathMetrics(
        apl=polyline_length(run.points),
        mgv=sphere_volume(float(np.min(run.radii))),
        vsd=float(np.var(clearance)),
    )


def compute_metrics(runs: Sequence[SolvedPath]) -> PathMetrics:
    """Average the per-run path length, minimum gap volume and clearance variance."""
    if not runs:
        raise NoDataError("no successful runs")
    per = [path_metrics(r) for r in runs]
    return PathMetrics(
        apl=float(np.mean([p.apl for p in per])),
        mgv=float(np.mean([p.mgv for p in per])),
        vsd=float(np.mean([p.vsd for p in per])),
    )


# --- verification oracles ----------------------------------------------------------


def lemma1_gap(path_set: HomotopicPathSet) -> float:
    """Center-chain length routed through the disc centers minus the center-path length.

    The center path is taken from the first to the last sphere center; the
    difference is nonnegative by the triangle inequality.
    """
    q = np.array([s.center for s in path_set.sigma_c])
    qo = np.array([r.q_o for r in path_set.records])
    through = np.linalg.norm(q[1:] - qo, axis=1).sum() + np.linalg.norm(qo - q[:-1], axis=1).sum()
    pts = np.vstack([q[:1], qo, q[-1:]])
    return float(through - polyline_length(pts))


def volume_objective(volumes, sigma_v: float, epsilon: float) -> float:
    v = np.asarray(volumes, dtype=float)
    return float(np.sum(1.0 / (v / sigma_v + epsilon)))


def best_grid_allocation(parts: int, v_total: float, sigma_v: float, epsilon: float, grid: int):
    """Exact minimum of the volume objective over allocations of ``grid`` cells
    into ``parts`` positive integers, by min-plus dynamic programming.

    Returns (objective, cell counts).
    """
    if parts < 1 or grid < parts:
        raise ValueError("need 1 <= parts <= grid")
    cells = np.arange(grid + 1)
    g = 1.0 / (v_total * cells / grid / sigma_v + epsilon)
    g[0] = np.inf  # every part must be positive
    best = g.copy()  # best[s]: one part summing to s
    choice = [None]
    for _ in range(1, parts):
        nxt = np.full(grid + 1, np.inf)
        arg = np.zeros(grid + 1, dtype=int)
        for s in range(grid + 1):
            c = np.arange(1, s + 1)
            tot = best[s - c] + g[c]
            if len(tot):
                k = int(np.argmin(tot))
                nxt[s], arg[s] = tot[k], c[k]
        choice.append(arg)
        best = nxt
    counts = []
    s = grid
    for j in range(parts - 1, 0, -1):
        c = int(choice[j][s])
        counts.append(c)
        s -= c
    counts.append(s)
    return float(best[grid]), np.array(counts[::-1])


def proposition1_oracle(v_total: float, m_range: Iterable[int], sigma_v: float, epsilon: float, grid: int):
    """Search chain lengths ``m`` and grid allocations of ``v_total`` over the
    ``m - 1`` gaps for the smallest volume objective.

    Returns (best m, allocation in volume units).
    """
    if not v_total > 0 or grid < 100:
        raise ValueError("need v_total > 0 and grid >= 100")
    best = None
    for m in m_range:
        obj, counts = best_grid_allocation(m - 1, v_total, sigma_v, epsilon, grid)
        if best is None or obj < best[0]:
            best = (obj, m, counts)
    _, m, counts = best
    return m, v_total * counts / grid


# --- files ---------------------------------------------------------------------------


def path_set_to_dict(ps: HomotopicPathSet) -> dict:
    return {
        "units": {"length": "m", "volume": "m^3"},
        "anchor": ps.anchor,
        "sigma_c": [{"center": s.center.tolist(), "radius": s.radius} for s in ps.sigma_c],
        "sigma_o": ps.sigma_o.tolist(),
        "boundary_paths": ps.boundary_paths.tolist(),
        "records": [
            {
                "q_o": r.q_o.tolist(),
                "disc_radius": r.disc_radius,
                "plane_normal": r.plane_normal.tolist(),
                "lens_volume": r.lens_volume,
            }
            for r in ps.records
        ],
    }


def path_set_from_dict(data: dict) -> HomotopicPathSet:
    return HomotopicPathSet(
        sigma_c=[Sphere(s["center"], s["radius"]) for s in data["sigma_c"]],
        sigma_o=np.array(data["sigma_o"], dtype=float),
        boundary_paths=np.array(data["boundary_paths"], dtype=float),
        records=[
            IntersectionRecord(np.array(r["q_o"]), r["disc_radius"], np.array(r["plane_normal"]), r["lens_volume"])
            for r in data["records"]
        ],
        anchor=data.get("anchor", "sphere_center"),
    )


def save_path_set(ps: HomotopicPathSet, path) -> None:
    Path(path).write_text(json.dumps(path_set_to_dict(ps), indent=1) + "\n")


def load_path_set(path) -> HomotopicPathSet:
    return path_set_from_dict(json.loads(Path(path).read_text()))
