"""Tube RRT* metrics for several rho_v values across obstacle densities."""

import argparse
import logging

from tuberrt import bench, plots

log = logging.getLogger("rho_sweep")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rho-v", type=float, nargs="+", default=[0.0, 0.15])
    ap.add_argument("--counts", type=int, nargs="+", default=[20, 40, 60, 80])
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--samples", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="runs/rho_sweep")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    spec = bench.ExperimentSpec(
        obstacle_counts=args.counts,
        rho_v=args.rho_v,
        trials=args.trials,
        base_seed=args.seed,
        samples=args.samples,
        algorithms=["tube"],
    )
    rows = bench.write_outputs(bench.run_experiment(spec, jobs=args.jobs), args.out)
    plots.emit_plots(rows, args.out)
    for r in sorted(rows, key=lambda r: (r["obstacles"], r["rho_v"])):
        log.info("rho_v=%-5g %3d obstacles  MGV %.3g  APL %.2f", r["rho_v"], r["obstacles"], r["mgv_median"], r["apl_median"])


if __name__ == "__main__":
    main()
