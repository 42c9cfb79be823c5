"""Tube RRT*: grow a tree of intersecting free-space spheres.

Each vertex is a sphere whose radius is the clearance at its center. A new
sphere only joins the tree when it overlaps an existing one, so every root to
leaf chain is a connected corridor. Edge scores trade normalized center
distance against the volume of the lens two neighbouring spheres share.
"""

from __future__ import annotations

import json
import math
import time
from collections import deque
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .environment import Environment
from .geometry import Lens, Sphere, as_point, lens_of, lens_volumes


class InvalidProblemError(ValueError):
    pass


class SamplingError(RuntimeError):
    pass


class WiringError(RuntimeError):
    """No obstacle-free parent candidate exists for a new node."""


@dataclass
class PlannerConfig:
    rho_d: float = 1.0
    rho_v: float = 0.15
    sigma_v: float = 1413.7
    epsilon: float = 0.01
    r_min: float = 0.1
    r_max: float = 2.0
    max_samples: int = 5000
    time_budget: Optional[float] = None
    seed: int = 0
    steer_max_iter: int = 32
    # keep repairing neighbours of every node whose cost dropped, not only those of the new node
    cascade_rewire: bool = True

    def __post_init__(self):
        if self.rho_d < 0 or self.rho_v < 0:
            raise ValueError("rho_d and rho_v must be nonnegative")
        if not self.sigma_v > 0 or not self.epsilon > 0:
            raise ValueError("sigma_v and epsilon must be positive")
        if not 0 < self.r_min <= self.r_max:
            raise ValueError("need 0 < r_min <= r_max")
        if self.max_samples <= 0:
            raise ValueError("max_samples must be positive")


@dataclass
class SphereNode:
    sphere: Sphere
    parent: Optional[int]
    cost: float
    lens_to_parent: Optional[Lens] = None


# --- primitive procedures -------------------------------------------------------


def find_max_radius(env: Environment, q, r_max: float) -> float:
    """Clearance at ``q`` clamped to ``r_max``; nonpositive inside obstacles."""
    return min(env.distance_to_obstacles(q), r_max)


def sample_free(env: Environment, rng: np.random.Generator, r_max: float, max_attempts: int = 10_000) -> Sphere:
    lo = np.asarray(env.bounds_min)
    ext = env.extent
    for _ in range(max_attempts):
        q = lo + rng.random(3) * ext
        r = find_max_radius(env, q, r_max)
        if r > 0.0:
            return Sphere(q, r)
    raise SamplingError(f"no free sample after {max_attempts} attempts")


def tube_steer(env: Environment, nearest: Sphere, rand: Sphere, r_max: float, max_iter: int = 32) -> Optional[Sphere]:
    """Slide ``rand`` toward ``nearest`` along their center line until the two overlap.

    Returns ``None`` if the loop does not settle within ``max_iter`` moves or
    ends on a nonpositive radius.
    """
    q_near, r_near = nearest.center, nearest.radius
    q_new, r_new = rand.center, rand.radius
    diff = q_new - q_near
    d = float(np.sqrt(diff @ diff))
    if r_new + r_near <= d:
        t = diff / d
    iters = 0
    while r_new + r_near <= d:
        if iters == max_iter:
            return None
        iters += 1
        d = max(r_new, r_near)
        q_new = q_near + d * t
        r_new = find_max_radius(env, q_new, r_max)
    if r_new <= 0.0:
        return None
    return Sphere(q_new, r_new)


def score(cfg: PlannerConfig, env_scale: float, a: Sphere, b: Sphere) -> float:
    """Connection score of two adjacent spheres (lower is better)."""
    lens = lens_of(a, b)
    v = lens.volume if lens is not None else 0.0
    d = float(np.linalg.norm(a.center - b.center))
    return cfg.rho_d * d / env_scale + cfg.rho_v / (v / cfg.sigma_v + cfg.epsilon)


def _scores(cfg, env_scale, centers, radii, c, r):
    d = np.linalg.norm(centers - c, axis=-1)
    v = lens_volumes(centers, radii, c, r)
    return cfg.rho_d * d / env_scale + cfg.rho_v / (v / cfg.sigma_v + cfg.epsilon)


# --- tree --------------------------------------------------------------------------


class TubeTree:
    """Sphere nodes in flat arrays; edges are parent links.

    ``links[i]`` caches (neighbour, score, lens volume) for every overlapping
    node whose center segment to ``i`` is obstacle-free, as seen by rewire.
    """

    def __init__(self, root: Sphere, capacity: int = 1024):
        self.centers = np.empty((capacity, 3))
        self.radii = np.empty(capacity)
        self.costs = np.empty(capacity)
        self.parents = np.full(capacity, -1, dtype=np.intp)
        self.edge_scores = np.zeros(capacity)
        self.edge_volumes = np.zeros(capacity)
        self.children: List[List[int]] = []
        self.links: List[list] = []
        self.size = 0
        self.add(root)
        self.costs[0] = 0.0

    def __len__(self):
        return self.size

    def _grow(self):
        cap = 2 * len(self.radii)
        for name in ("centers", "radii", "costs", "parents", "edge_scores", "edge_volumes"):
            old = getattr(self, name)
            new = np.empty((cap,) + old.shape[1:], dtype=old.dtype)
            new[: self.size] = old[: self.size]
            setattr(self, name, new)

    def add(self, s: Sphere) -> int:
        if self.size == len(self.radii):
            self._grow()
        i = self.size
        self.centers[i] = s.center
        self.radii[i] = s.radius
        self.costs[i] = math.inf
        self.parents[i] = -1
        self.edge_scores[i] = 0.0
        self.edge_volumes[i] = 0.0
        self.children.append([])
        self.links.append([])
        self.size += 1
        return i

    def pop(self):
        """Drop the most recently added node; it must still be unwired."""
        i = self.size - 1
        assert self.parents[i] < 0 and not self.children[i] and not self.links[i]
        self.children.pop()
        self.links.pop()
        self.size -= 1

    def sphere(self, i: int) -> Sphere:
        return Sphere(self.centers[i], float(self.radii[i]))

    def node(self, i: int) -> SphereNode:
        p = int(self.parents[i])
        if p < 0:
            return SphereNode(self.sphere(i), None, float(self.costs[i]))
        return SphereNode(self.sphere(i), p, float(self.costs[i]), lens_of(self.sphere(p), self.sphere(i)))

    @property
    def nodes(self) -> List[SphereNode]:
        return [self.node(i) for i in range(self.size)]

    def set_parent(self, child: int, parent: int, edge_score: float, edge_volume: float):
        old = int(self.parents[child])
        if old >= 0:
            self.children[old].remove(child)
        self.parents[child] = parent
        self.children[parent].append(child)
        self.edge_scores[child] = edge_score
        self.edge_volumes[child] = edge_volume
        self.costs[child] = self.costs[parent] + edge_score
        self.propagate(child)

    def propagate(self, i: int):
        """Refresh costs of every descendant of ``i`` from its current cost."""
        stack = [i]
        costs, scores, children = self.costs, self.edge_scores, self.children
        while stack:
            u = stack.pop()
            cu = costs[u]
            for c in children[u]:
                costs[c] = cu + scores[c]
                stack.append(c)

    def subtree(self, i: int) -> List[int]:
        out, stack = [], [i]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(self.children[u])
        return out

    def path_to(self, i: int) -> List[int]:
        path = [i]
        seen = {i}
        while self.parents[path[-1]] >= 0:
            p = int(self.parents[path[-1]])
            if p in seen:
                raise RuntimeError("cycle in tube tree")
            seen.add(p)
            path.append(p)
        return path[::-1]


def nearest(tree: TubeTree, q) -> int:
    diff = tree.centers[: tree.size] - np.asarray(q, dtype=float)
    return int(np.argmin(np.einsum("ij,ij->i", diff, diff)))


def near_connect(tree: TubeTree, new: Sphere) -> np.ndarray:
    """Ids of all tree spheres that strictly overlap ``new``, ascending."""
    n = tree.size
    d = np.linalg.norm(tree.centers[:n] - new.center, axis=1)
    return np.flatnonzero(tree.radii[:n] + new.radius > d)


_OVERLAP_MARGIN = 1e-9


def rewire(
    tree: TubeTree,
    env: Environment,
    cfg: PlannerConfig,
    env_scale: float,
    new_id: int,
    near_set,
    clearance_balls: bool = False,
) -> int:
    """Wire ``new_id`` to its cheapest feasible neighbour, then reroute neighbours through it.

    Returns the chosen parent id. Raises :class:`WiringError` when no neighbour
    has an obstacle-free center segment.

    With ``clearance_balls`` the caller promises every radius is at most the
    clearance at its center, as in trees grown by the planner. Each open ball
    is then obstacle-free, and when two overlap by more than a small margin
    every point of their center segment sits strictly inside one of them, so
    only marginal overlaps need the explicit segment test.
    """
    near = np.asarray(near_set, dtype=np.intp)
    near = near[near != new_id]
    if len(near) == 0:
        raise WiringError("empty near set")
    c_new = tree.centers[new_id].copy()
    r_new = float(tree.radii[new_id])
    cs = tree.centers[near]
    rs = tree.radii[near]
    d = np.linalg.norm(cs - c_new, axis=1)
    vols = lens_volumes(cs, rs, c_new, r_new)
    s = cfg.rho_d * d / env_scale + cfg.rho_v / (vols / cfg.sigma_v + cfg.epsilon)
    if clearance_balls:
        free = np.ones(len(near), dtype=bool)
        marginal = np.flatnonzero(rs + r_new - d <= _OVERLAP_MARGIN)
        if len(marginal):
            free[marginal] = env.segments_obstacle_free(cs[marginal], c_new)
    else:
        free = env.segments_obstacle_free(cs, c_new)
    via = np.where(free, tree.costs[near] + s, np.inf)
    k = int(np.argmin(via))
    if not np.isfinite(via[k]):
        raise WiringError(f"no obstacle-free parent for node {new_id}")
    parent = int(near[k])
    tree.set_parent(new_id, parent, float(s[k]), float(vols[k]))
    own = tree.links[new_id]
    for j in np.flatnonzero(free):
        x, sj, vj = int(near[j]), float(s[j]), float(vols[j])
        own.append((x, sj, vj))
        tree.links[x].append((new_id, sj, vj))
    cost_new = tree.costs[new_id]
    dropped = []
    for j in np.flatnonzero(free & (cost_new + s < tree.costs[near])):
        x = int(near[j])
        # costs can drop while earlier neighbours are rerouted; recheck
        if cost_new + s[j] < tree.costs[x]:
            tree.set_parent(x, new_id, float(s[j]), float(vols[j]))
            dropped.append(x)
    if cfg.cascade_rewire and dropped:
        _repair(tree, dropped)
    return parent


def _repair(tree: TubeTree, roots) -> None:
    """Propagate cost decreases over cached links until no single re-parenting helps.

    Every node below a rerouted node got cheaper, so its neighbours may now
    prefer it as a parent. Scores are positive, so an ancestor can never be
    re-parented onto its own descendant and the loop terminates.
    """
    costs, links = tree.costs, tree.links
    queue = deque()
    queued = set()
    for x in roots:
        for u in tree.subtree(x):
            if u not in queued:
                queued.add(u)
                queue.append(u)
    while queue:
        u = queue.popleft()
        queued.discard(u)
        for v, s, vol in links[u]:
            if costs[u] + s < costs[v]:
                tree.set_parent(v, u, s, vol)
                for w in tree.subtree(v):
                    if w not in queued:
                        queued.add(w)
                        queue.append(w)


# --- planning loop ----------------------------------------------------------------


@dataclass
class PlanResult:
    tree: TubeTree
    goal_sphere: Sphere
    goal_id: Optional[int]
    best_cost: float
    config: PlannerConfig
    q_init: np.ndarray
    q_goal: np.ndarray
    samples: int
    wall_time: float

    @property
    def success(self) -> bool:
        return self.goal_id is not None

    def center_path(self) -> List[Sphere]:
        """Root-to-goal sphere chain, closed by the goal sphere."""
        if self.goal_id is None:
            raise ValueError("planning did not reach the goal")
        return extract_spheres(self.tree, self.goal_id) + [self.goal_sphere]


def extract_spheres(tree: TubeTree, node_id: int) -> List[Sphere]:
    return [tree.sphere(i) for i in tree.path_to(node_id)]


class TubeRRTStar:
    """Incremental Tube RRT* search.

    ``grow`` can be called repeatedly; the random stream does not depend on
    the budget, so a longer run always extends a shorter one with the same seed.
    """

    def __init__(self, env: Environment, cfg: PlannerConfig, q_init, q_goal):
        self.env = env
        self.cfg = cfg
        self.q_init = as_point(q_init)
        self.q_goal = as_point(q_goal)
        for name, q in (("start", self.q_init), ("goal", self.q_goal)):
            if not env.contains(q) or find_max_radius(env, q, cfg.r_max) <= 0.0:
                raise InvalidProblemError(f"{name} point {q.tolist()} is not in free space")
        self.scale = float(np.linalg.norm(self.q_goal - self.q_init))
        if self.scale <= 0.0:
            raise InvalidProblemError("start and goal coincide")
        self.rng = np.random.default_rng(cfg.seed)
        self.tree = TubeTree(Sphere(self.q_init, find_max_radius(env, self.q_init, cfg.r_max)))
        self.goal_sphere = Sphere(self.q_goal, find_max_radius(env, self.q_goal, cfg.r_max))
        self.goal_scores = np.full(1024, np.inf)
        self._note_goal(0)
        self.samples = 0
        self.wall_time = 0.0

    def _note_goal(self, i: int):
        if len(self.goal_scores) <= i:
            self.goal_scores = np.concatenate([self.goal_scores, np.full(len(self.goal_scores), np.inf)])
        g = self.goal_sphere
        d = float(np.linalg.norm(self.tree.centers[i] - g.center))
        if self.tree.radii[i] + g.radius > d:
            self.goal_scores[i] = score(self.cfg, self.scale, self.tree.sphere(i), g)

    def step(self) -> Optional[int]:
        """Draw one sample; return the id of the added node, if any."""
        cfg, env, tree = self.cfg, self.env, self.tree
        self.samples += 1
        x_rand = sample_free(env, self.rng, cfg.r_max)
        i_near = nearest(tree, x_rand.center)
        x_new = tube_steer(env, tree.sphere(i_near), x_rand, cfg.r_max, cfg.steer_max_iter)
        if x_new is None or not x_new.radius > cfg.r_min:
            return None
        near = near_connect(tree, x_new)
        new_id = tree.add(x_new)
        try:
            rewire(tree, env, cfg, self.scale, new_id, near, clearance_balls=True)
        except WiringError:
            tree.pop()
            return None
        self._note_goal(new_id)
        return new_id

    def grow(self, n: int, time_budget: Optional[float] = None):
        t0 = time.perf_counter()
        for _ in range(n):
            if time_budget is not None and time.perf_counter() - t0 >= time_budget:
                break
            self.step()
        self.wall_time += time.perf_counter() - t0

    def best_goal(self):
        """(node id, total cost) of the cheapest goal connection, or (None, inf)."""
        n = self.tree.size
        total = self.tree.costs[:n] + self.goal_scores[:n]
        k = int(np.argmin(total))
        if not np.isfinite(total[k]):
            return None, math.inf
        return k, float(total[k])

    def result(self) -> PlanResult:
        gid, cost = self.best_goal()
        return PlanResult(
            self.tree, self.goal_sphere, gid, cost, self.cfg, self.q_init, self.q_goal, self.samples, self.wall_time
        )


def plan(env: Environment, cfg: PlannerConfig, q_init, q_goal) -> PlanResult:
    planner = TubeRRTStar(env, cfg, q_init, q_goal)
    planner.grow(cfg.max_samples, cfg.time_budget)
    return planner.result()


# --- result files -------------------------------------------------------------------


def result_to_dict(res: PlanResult) -> dict:
    t = res.tree
    nodes = [
        {
            "id": i,
            "center": t.centers[i].tolist(),
            "radius": float(t.radii[i]),
            "parent": None if t.parents[i] < 0 else int(t.parents[i]),
            "cost": float(t.costs[i]),
        }
        for i in range(t.size)
    ]
    return {
        "config": asdict(res.config),
        "seed": res.config.seed,
        "q_init": res.q_init.tolist(),
        "q_goal": res.q_goal.tolist(),
        "goal_sphere": {"center": res.goal_sphere.center.tolist(), "radius": res.goal_sphere.radius},
        "goal_node": res.goal_id,
        "best_cost": res.best_cost if math.isfinite(res.best_cost) else None,
        "samples": res.samples,
        "wall_time": res.wall_time,
        "nodes": nodes,
    }


def save_result(res: PlanResult, path) -> None:
    Path(path).write_text(json.dumps(result_to_dict(res), indent=1) + "\n")
