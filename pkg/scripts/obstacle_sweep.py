"""Tube RRT* against vanilla RRT* across obstacle densities.

Writes records.csv, timings.csv, summary.csv and one SVG panel per metric.

    python3 scripts/obstacle_sweep.py --trials 30 --out runs/sweep
"""

import argparse
import logging

from tuberrt import bench, plots

log = logging.getLogger("obstacle_sweep")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--counts", type=int, nargs="+", default=[20, 40, 60, 80])
    ap.add_argument("--rho-v", type=float, default=0.15)
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--samples", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0, help="base seed")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="runs/obstacle_sweep")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    spec = bench.ExperimentSpec(
        obstacle_counts=args.counts,
        rho_v=[args.rho_v],
        trials=args.trials,
        base_seed=args.seed,
        samples=args.samples,
    )
    records = bench.run_experiment(spec, jobs=args.jobs)
    rows = bench.write_outputs(records, args.out)
    plots.emit_plots(rows, args.out)
    for r in rows:
        log.info(
            "%-8s %3d obstacles  success %.2f  MGV %.3g  APL %.2f  VSD %.3g",
            r["algorithm"], r["obstacles"], r["success_rate"], r["mgv_median"], r["apl_median"], r["vsd_median"],
        )


if __name__ == "__main__":
    main()
