"""Tube RRT*: homotopic path sets for robot swarms from chains of free-space spheres."""

from .environment import Environment, WorldGenConfig, generate_world, load_world, save_world
from .geometry import Lens, Sphere, convex_combination, lens_of, segment_point_distance
from .homotopy import (
    HomotopicPathSet,
    PathMetrics,
    Terminal,
    build_boundary_paths,
    compute_metrics,
    interpolate,
    sample_homotopic_paths,
)
from .planner import PlannerConfig, PlanResult, TubeRRTStar, plan
from .rrt_star import plan_baseline_rrt_star

__version__ = "0.1.0"
