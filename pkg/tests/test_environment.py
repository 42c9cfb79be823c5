import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tuberrt.environment import (
    BoxObstacle,
    Environment,
    GenerationError,
    OutOfBoundsError,
    SphereObstacle,
    WorldFormatError,
    WorldGenConfig,
    default_endpoints,
    dumps_world,
    generate_world,
    load_world,
    loads_world,
    save_world,
)
from tuberrt.geometry import segment_point_distance


def test_empty_world_distance_is_face_distance():
    env = Environment((0, 0, 0), (10, 10, 10))
    assert env.distance_to_obstacles((5, 5, 5)) == 5.0


def test_sphere_obstacle_distance():
    env = Environment((-100, -100, -100), (100, 100, 100), [SphereObstacle((3, 0, 0), 1.0)])
    d = env.distance_to_obstacles((0, 0, 0))
    assert d == pytest.approx(2.0, abs=1e-12)
    # dense surface sampling of the obstacle agrees
    u = np.random.default_rng(0).normal(size=(200_000, 3))
    surf = np.array([3, 0, 0]) + u / np.linalg.norm(u, axis=1)[:, None]
    assert np.linalg.norm(surf, axis=1).min() == pytest.approx(d, abs=1e-3)


def test_inside_obstacle_is_negative(mixed_env):
    assert mixed_env.distance_to_obstacles((3, 3, 3)) < 0
    assert mixed_env.distance_to_obstacles((5.5, 7, 5)) < 0


def test_box_distance_outside_corner():
    env = Environment((-10, -10, -10), (10, 10, 10), [BoxObstacle((1, 1, 1), (2, 2, 2))])
    assert env.distance_to_obstacles((0, 0, 0)) == pytest.approx(math.sqrt(3))


def test_out_of_bounds_query_raises(mixed_env):
    with pytest.raises(OutOfBoundsError):
        mixed_env.distance_to_obstacles((11, 0, 0))


def test_degenerate_segment_in_free_space(mixed_env):
    assert mixed_env.segment_obstacle_free((1, 1, 1), (1, 1, 1))


def test_segment_through_center_blocked(mixed_env):
    assert not mixed_env.segment_obstacle_free((0.5, 3, 3), (9, 3, 3))
    assert not mixed_env.segment_obstacle_free((5.5, 5, 1), (5.5, 9, 1))


def test_grazing_segment_is_blocked():
    env = Environment((-5, -5, -5), (5, 5, 5), [SphereObstacle((0, 1, 0), 1.0)])
    a, b = (-1, 0, 0), (1, 0, 0)
    assert segment_point_distance((0, 1, 0), a, b) == 1.0  # touches the surface exactly
    assert not env.segment_obstacle_free(a, b)
    assert env.segment_obstacle_free((-1, -1e-9, 0), (1, -1e-9, 0))


def test_grazing_box_face_is_blocked():
    env = Environment((-5, -5, -5), (5, 5, 5), [BoxObstacle((0, 0, 0), (1, 1, 1))])
    assert not env.segment_obstacle_free((-1, 1, 0.5), (2, 1, 0.5))
    assert env.segment_obstacle_free((-1, 1.0000001, 0.5), (2, 1.0000001, 0.5))


def _random_world(seed, n=60):
    rng = np.random.default_rng(seed)
    obs = []
    for _ in range(n):
        c = rng.uniform(0, 20, 3)
        if rng.random() < 0.5:
            obs.append(SphereObstacle(tuple(c), float(rng.uniform(0.2, 2))))
        else:
            h = rng.uniform(0.2, 2, 3)
            obs.append(BoxObstacle(tuple(c - h), tuple(c + h)))
    return Environment((0, 0, 0), (20, 20, 20), obs)


def test_index_matches_brute_force_exactly():
    env = _random_world(1)
    rng = np.random.default_rng(2)
    pts = rng.uniform(0, 20, size=(1000, 3))
    for p in pts:
        assert env.distance_to_obstacles(p) == env.distance_to_obstacles_brute(p)
    a = rng.uniform(0, 20, size=(1000, 3))
    b = np.clip(a + rng.normal(scale=3, size=(1000, 3)), 0, 20)
    brute = env.segments_obstacle_free_brute(a, b)
    single = np.array([env.segment_obstacle_free(x, y) for x, y in zip(a, b)])
    np.testing.assert_array_equal(single, brute)
    np.testing.assert_array_equal(env.segments_obstacle_free(a[:40], b[:40]), brute[:40])


def test_segment_test_against_sampling():
    env = _random_world(3, 30)
    rng = np.random.default_rng(4)
    for _ in range(300):
        a = rng.uniform(0, 20, 3)
        b = np.clip(a + rng.normal(scale=2, size=3), 0, 20)
        t = np.linspace(0, 1, 400)[:, None]
        samples_hit = any(not env.point_free(p) for p in a + t * (b - a))
        if samples_hit:
            assert not env.segment_obstacle_free(a, b)


@given(st.tuples(*[st.floats(0, 20)] * 3), st.tuples(*[st.floats(0, 20)] * 3))
def test_distance_is_one_lipschitz(p, q):
    env = _random_world(5, 40)
    dp, dq = env.distance_to_obstacles(p), env.distance_to_obstacles(q)
    assert abs(dp - dq) <= np.linalg.norm(np.subtract(p, q)) + 1e-9


def test_generate_empty_world():
    env = generate_world(WorldGenConfig(obstacle_count=0, seed=3))
    assert env.obstacles == ()


def test_generation_is_deterministic():
    cfg = WorldGenConfig(obstacle_count=30, seed=11)
    assert dumps_world(generate_world(cfg)) == dumps_world(generate_world(cfg))
    assert generate_world(cfg).obstacles != generate_world(WorldGenConfig(obstacle_count=30, seed=12)).obstacles


def test_generated_world_structure():
    env = generate_world(WorldGenConfig(size=(25, 25, 3), obstacle_count=20, seed=7))
    assert len(env.obstacles) == 20
    start, goal = default_endpoints((25, 25, 3))
    for ob in env.obstacles:
        assert isinstance(ob, BoxObstacle)
        assert ob.min[2] == 0.0 and ob.max[2] == 3.0  # full-height pillars
        c = 0.5 * (np.array(ob.min) + np.array(ob.max))
        assert np.all(c >= 0) and np.all(c <= [25, 25, 3])
    for q in (start, goal):
        assert env.distance_to_obstacles(q) >= min(2.0, 1.5)


def test_generation_failure():
    cfg = WorldGenConfig(size=(4, 4, 3), obstacle_count=5, seed=0, keep_out_radius=10)
    with pytest.raises(GenerationError):
        generate_world(cfg)


def test_sphere_obstacle_worlds():
    env = generate_world(WorldGenConfig(obstacle_count=10, shape="sphere", footprint=(2, 2, 2), seed=1))
    assert all(isinstance(o, SphereObstacle) and o.radius == 1.0 for o in env.obstacles)


def test_world_file_round_trip(tmp_path, mixed_env):
    env = generate_world(WorldGenConfig(obstacle_count=25, seed=9))
    for world in (env, mixed_env):
        path = tmp_path / "w.json"
        save_world(world, path)
        back = load_world(path)
        assert back == world
        assert dumps_world(back) == path.read_text()


def test_empty_world_file():
    env = loads_world('{"bounds": {"min": [0, 0, 0], "max": [1, 2, 3]}, "obstacles": [], "meta": {}}')
    assert env.bounds_max == (1.0, 2.0, 3.0) and env.obstacles == ()


def test_hand_written_box_file():
    text = """{
  "bounds": {"min": [0, 0, 0], "max": [10, 10, 3]},
  "obstacles": [{"type": "box", "min": [1, 2, 0], "max": [2.5, 3, 3]}],
  "meta": {"seed": null, "generator": "hand"}
}"""
    env = loads_world(text)
    (ob,) = env.obstacles
    assert ob == BoxObstacle((1.0, 2.0, 0.0), (2.5, 3.0, 3.0))
    assert env.meta["generator"] == "hand"


@pytest.mark.parametrize(
    "text, where",
    [
        ('{"bounds": {"min": [0, 0, 0], "max": [1, 1, 1]},\n "obstacles": [,]}', "line 2"),
        ('{"obstacles": []}', "$"),
        ('{"bounds": {"min": [0, 0], "max": [1, 1, 1]}}', "bounds.min"),
        ('{"bounds": {"min": [0, 0, 0], "max": [1, 1, 1]}, "obstacles": [{"type": "cone"}]}', "obstacles[0].type"),
        ('{"bounds": {"min": [0, 0, 0], "max": [1, 1, 1]}, "obstacles": [{"type": "sphere", "center": [0, 0, 0]}]}', "obstacles[0]"),
        ('{"bounds": {"min": [0, 0, 0], "max": [1, 1, 1]}, "obstacles": [{"type": "box", "min": [0, 0, 0], "max": [1, "x", 1]}]}', "obstacles[0].max[1]"),
        ('{"bounds": {"min": [0, 0, 0], "max": [1, 1, 1]}, "obstacles": [{"type": "sphere", "center": [0, 0, 0], "radius": -1}]}', "obstacles[0]"),
    ],
)
def test_malformed_files_report_location(text, where):
    with pytest.raises(WorldFormatError) as exc:
        loads_world(text)
    assert exc.value.where.startswith(where)
