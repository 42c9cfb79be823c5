"""Command line entry point: ``tuberrt {plan,gen-world,bench,plots}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import bench, plots
from .environment import WorldGenConfig, endpoints_for, generate_world, load_world, save_world
from .homotopy import (
    build_boundary_paths,
    path_metrics,
    path_set_to_dict,
    regular_terminal,
    sample_homotopic_paths,
    solved_from_path_set,
)
from .planner import PlannerConfig, plan, result_to_dict

log = logging.getLogger("tuberrt")


def cmd_gen_world(args):
    cfg = WorldGenConfig(
        size=tuple(args.size), obstacle_count=args.obstacles, footprint=tuple(args.footprint), seed=args.seed, shape=args.shape
    )
    env = generate_world(cfg)
    save_world(env, args.out)
    log.info("wrote %s with %d obstacles", args.out, len(env.obstacles))


def cmd_plan(args):
    env = load_world(args.env)
    start, goal = endpoints_for(env)
    if args.start is not None:
        start = np.array(args.start)
    if args.goal is not None:
        goal = np.array(args.goal)
    cfg = PlannerConfig(
        rho_d=args.rho_d,
        rho_v=args.rho_v,
        sigma_v=args.sigma_v,
        epsilon=args.epsilon,
        r_min=args.r_min,
        r_max=args.r_max,
        max_samples=args.samples,
        time_budget=args.time_budget,
        seed=args.seed,
    )
    res = plan(env, cfg, start, goal)
    out = result_to_dict(res)
    if res.success:
        axis = goal - start
        terms = (
            regular_terminal(start, axis, args.terminal_radius, args.vertices),
            regular_terminal(goal, axis, args.terminal_radius, args.vertices),
        )
        ps = build_boundary_paths(res.center_path(), terms, env)
        out["path_set"] = path_set_to_dict(ps)
        out["metrics"] = asdict(path_metrics(solved_from_path_set(env, ps)))
        if args.paths:
            rng = np.random.default_rng(args.seed)
            out["homotopic_paths"] = [p.tolist() for p in sample_homotopic_paths(ps, args.paths, rng)]
        if args.svg:
            plots.save_world_svg(args.svg, env, ps.sigma_c, [ps.sigma_o, *ps.boundary_paths])
        log.info("success: cost %.4f, %d spheres on the path, %d tree nodes", res.best_cost, len(ps.sigma_c), len(res.tree))
    else:
        log.info("no path found after %d samples", res.samples)
    text = json.dumps(out, indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if res.success else 1


def cmd_bench(args):
    spec = bench.ExperimentSpec.from_json(args.spec)
    records = bench.run_experiment(spec, jobs=args.jobs)
    rows = bench.write_outputs(records, args.out_dir)
    plots.emit_plots(rows, args.out_dir)
    for row in rows:
        rho = "" if row["rho_v"] is None else f" rho_v={row['rho_v']:g}"
        log.info(
            "%s%s obstacles=%d success=%.2f APL=%.3f MGV=%.4f VSD=%.4f",
            row["algorithm"], rho, row["obstacles"], row["success_rate"],
            row["apl_median"], row["mgv_median"], row["vsd_median"],
        )


def cmd_plots(args):
    rows = bench.read_summary_csv(args.summary)
    for p in plots.emit_plots(rows, args.out_dir):
        log.info("wrote %s", p)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tuberrt", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="run Tube RRT* once on a world file")
    p.add_argument("--env", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=5000)
    p.add_argument("--time-budget", type=float, default=None)
    p.add_argument("--rho-v", type=float, default=0.15)
    p.add_argument("--rho-d", type=float, default=1.0)
    p.add_argument("--sigma-v", type=float, default=1413.7)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--r-min", type=float, default=0.1)
    p.add_argument("--r-max", type=float, default=2.0)
    p.add_argument("--paths", type=int, default=0, metavar="L", help="number of homotopic paths to sample")
    p.add_argument("--start", type=float, nargs=3, default=None)
    p.add_argument("--goal", type=float, nargs=3, default=None)
    p.add_argument("--terminal-radius", type=float, default=0.5)
    p.add_argument("--vertices", type=int, default=4, help="terminal vertex count M")
    p.add_argument("--svg", default=None, help="also write a top-down SVG rendering")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_plan)

    g = sub.add_parser("gen-world", help="generate a random obstacle world")
    g.add_argument("--size", type=float, nargs=3, default=[25.0, 25.0, 3.0])
    g.add_argument("--obstacles", type=int, default=20)
    g.add_argument("--footprint", type=float, nargs=3, default=[1.0, 1.0, 3.0])
    g.add_argument("--shape", choices=["box", "sphere"], default="box")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_world)

    b = sub.add_parser("bench", help="run a seeded experiment batch")
    b.add_argument("--spec", required=True, help="JSON experiment spec")
    b.add_argument("--out-dir", required=True)
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_bench)

    q = sub.add_parser("plots", help="render SVG panels from a summary CSV")
    q.add_argument("--summary", required=True)
    q.add_argument("--out-dir", required=True)
    q.set_defaults(func=cmd_plots)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    return int(args.func(args) or 0)


if __name__ == "__main__":
    sys.exit(main())
