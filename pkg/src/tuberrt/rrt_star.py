"""Vanilla point RRT* used as the comparison baseline.

Euclidean edge cost, steering step ``r_max`` and the usual shrinking-ball
neighbourhood. Sampling and collision checks are shared with Tube RRT*.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .environment import Environment
from .geometry import as_point
from .planner import InvalidProblemError, PlannerConfig, find_max_radius, sample_free


@dataclass
class BaselineResult:
    path: Optional[np.ndarray]  # (k, 3) start..goal, None on failure
    cost: float
    node_count: int
    samples: int
    wall_time: float

    @property
    def success(self) -> bool:
        return self.path is not None


def shrinking_ball_gamma(env: Environment, dim: int = 3) -> float:
    """RRT* ball constant slightly above the asymptotic-optimality threshold."""
    zeta = math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)
    return 1.1 * 2.0 * (1.0 + 1.0 / dim) ** (1.0 / dim) * (env.volume / zeta) ** (1.0 / dim)


def plan_baseline_rrt_star(env: Environment, cfg: PlannerConfig, q_init, q_goal) -> BaselineResult:
    q_init, q_goal = as_point(q_init), as_point(q_goal)
    for name, q in (("start", q_init), ("goal", q_goal)):
        if not env.contains(q) or find_max_radius(env, q, cfg.r_max) <= 0.0:
            raise InvalidProblemError(f"{name} point {q.tolist()} is not in free space")
    rng = np.random.default_rng(cfg.seed)
    step = cfg.r_max
    gamma = shrinking_ball_gamma(env)

    cap = cfg.max_samples + 1
    pts = np.empty((cap, 3))
    cost = np.empty(cap)
    parent = np.full(cap, -1, dtype=np.intp)
    children: List[List[int]] = [[]]
    goal_ok = np.zeros(cap, dtype=bool)
    pts[0], cost[0] = q_init, 0.0
    goal_ok[0] = np.linalg.norm(q_goal - q_init) <= step and env.segment_obstacle_free(q_init, q_goal)
    n = 1

    def reparent(c, p, edge):
        old = parent[c]
        if old >= 0:
            children[old].remove(c)
        parent[c] = p
        children[p].append(c)
        cost[c] = cost[p] + edge
        stack = [c]
        while stack:
            u = stack.pop()
            for w in children[u]:
                cost[w] = cost[u] + np.linalg.norm(pts[w] - pts[u])
                stack.append(w)

    t0 = time.perf_counter()
    samples = 0
    for _ in range(cfg.max_samples):
        if cfg.time_budget is not None and time.perf_counter() - t0 >= cfg.time_budget:
            break
        samples += 1
        q_rand = sample_free(env, rng, cfg.r_max).center
        diff = pts[:n] - q_rand
        i_near = int(np.argmin(np.einsum("ij,ij->i", diff, diff)))
        v = q_rand - pts[i_near]
        dist = float(np.linalg.norm(v))
        q_new = q_rand if dist <= step else pts[i_near] + v * (step / dist)
        if not env.segment_obstacle_free(pts[i_near], q_new):
            continue
        radius = min(gamma * (math.log(n + 1) / (n + 1)) ** (1.0 / 3.0), step)
        d = np.linalg.norm(pts[:n] - q_new, axis=1)
        near = np.flatnonzero(d <= radius)
        if i_near not in near:
            near = np.append(near, i_near)
        free = env.segments_obstacle_free(pts[near], q_new)
        via = np.where(free, cost[near] + d[near], np.inf)
        k = int(np.argmin(via))
        new = n
        pts[new] = q_new
        cost[new] = math.inf
        children.append([])
        n += 1
        reparent(new, int(near[k]), float(d[near[k]]))
        for j in np.flatnonzero(free & (cost[new] + d[near] < cost[near])):
            x = int(near[j])
            if cost[new] + d[x] < cost[x]:
                reparent(x, new, float(d[x]))
        goal_ok[new] = np.linalg.norm(q_goal - q_new) <= step and env.segment_obstacle_free(q_new, q_goal)
    wall = time.perf_counter() - t0

    total = np.where(goal_ok[:n], cost[:n] + np.linalg.norm(pts[:n] - q_goal, axis=1), np.inf)
    best = int(np.argmin(total))
    if not np.isfinite(total[best]):
        return BaselineResult(None, math.inf, n, samples, wall)
    chain = [best]
    while parent[chain[-1]] >= 0:
        chain.append(int(parent[chain[-1]]))
    path = np.vstack([pts[chain[::-1]], q_goal[None]])
    return BaselineResult(path, float(total[best]), n, samples, wall)
