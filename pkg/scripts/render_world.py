"""Plan once in a generated world and draw it from above: obstacles, the
sphere chain, the center path and the boundary paths."""

import argparse

from tuberrt.environment import WorldGenConfig, default_endpoints, generate_world
from tuberrt.homotopy import build_boundary_paths, regular_terminal
from tuberrt.planner import PlannerConfig, plan
from tuberrt.plots import save_world_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--obstacles", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=5000)
    ap.add_argument("--rho-v", type=float, default=0.15)
    ap.add_argument("--vertices", type=int, default=4)
    ap.add_argument("--out", default="world.svg")
    args = ap.parse_args()

    size = (25.0, 25.0, 3.0)
    env = generate_world(WorldGenConfig(size=size, obstacle_count=args.obstacles, seed=args.seed))
    start, goal = default_endpoints(size)
    res = plan(env, PlannerConfig(rho_v=args.rho_v, max_samples=args.samples, seed=args.seed), start, goal)
    if not res.success:
        raise SystemExit(f"no path after {res.samples} samples")
    chain = res.center_path()
    axis = goal - start
    terms = (regular_terminal(start, axis, 0.5, args.vertices), regular_terminal(goal, axis, 0.5, args.vertices))
    ps = build_boundary_paths(chain, terms, env)
    save_world_svg(args.out, env, chain, [ps.sigma_o, *ps.boundary_paths])
    print(f"{args.out}: {len(chain)} spheres, min radius {min(s.radius for s in chain):.3f} m")


if __name__ == "__main__":
    main()
