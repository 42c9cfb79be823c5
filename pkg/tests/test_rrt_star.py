import math

import numpy as np
import pytest

from tuberrt.environment import BoxObstacle, Environment, WorldGenConfig, default_endpoints, generate_world
from tuberrt.geometry import polyline_length
from tuberrt.planner import InvalidProblemError, PlannerConfig
from tuberrt.rrt_star import plan_baseline_rrt_star, shrinking_ball_gamma


def test_gamma_value():
    env = Environment((0, 0, 0), (25, 25, 3))
    unit_ball = 4 * math.pi / 3
    expected = 1.1 * 2 * (4 / 3) ** (1 / 3) * (25 * 25 * 3 / unit_ball) ** (1 / 3)
    assert shrinking_ball_gamma(env) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_empty_world_near_straight(seed):
    env = Environment((0, 0, 0), (25, 25, 3))
    start, goal = default_endpoints((25, 25, 3))
    res = plan_baseline_rrt_star(env, PlannerConfig(max_samples=2000, seed=seed), start, goal)
    assert res.success
    np.testing.assert_array_equal(res.path[0], start)
    np.testing.assert_array_equal(res.path[-1], goal)
    assert res.cost == pytest.approx(polyline_length(res.path), rel=1e-9)
    assert res.cost <= 1.2 * np.linalg.norm(goal - start)


def test_deterministic():
    env = generate_world(WorldGenConfig(obstacle_count=40, seed=3))
    start, goal = default_endpoints((25, 25, 3))
    cfg = PlannerConfig(max_samples=800, seed=7)
    a = plan_baseline_rrt_star(env, cfg, start, goal)
    b = plan_baseline_rrt_star(env, cfg, start, goal)
    assert a.cost == b.cost
    np.testing.assert_array_equal(a.path, b.path)


def test_path_edges_are_free():
    env = generate_world(WorldGenConfig(obstacle_count=60, seed=2))
    start, goal = default_endpoints((25, 25, 3))
    res = plan_baseline_rrt_star(env, PlannerConfig(max_samples=2000, seed=2), start, goal)
    assert res.success
    for a, b in zip(res.path, res.path[1:]):
        assert env.segment_obstacle_free(a, b)
        assert np.linalg.norm(b - a) <= 2.0 + 1e-9


def test_walled_goal_fails():
    env = Environment((0, 0, 0), (20, 6, 3), [BoxObstacle((9, -1, -1), (10, 7, 4))])
    res = plan_baseline_rrt_star(env, PlannerConfig(max_samples=800, seed=0), (2, 3, 1.5), (18, 3, 1.5))
    assert not res.success and res.path is None and math.isinf(res.cost)


def test_invalid_start():
    env = Environment((0, 0, 0), (10, 10, 10), [BoxObstacle((0, 0, 0), (2, 2, 2))])
    with pytest.raises(InvalidProblemError):
        plan_baseline_rrt_star(env, PlannerConfig(max_samples=5), (1, 1, 1), (8, 8, 8))


@pytest.mark.slow
def test_success_rate_on_solvable_world():
    env = generate_world(WorldGenConfig(obstacle_count=20, seed=0))
    start, goal = default_endpoints((25, 25, 3))
    wins = sum(plan_baseline_rrt_star(env, PlannerConfig(max_samples=5000, seed=s), start, goal).success for s in range(100))
    assert wins >= 95
