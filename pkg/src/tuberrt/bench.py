"""Seeded experiment batches: obstacle-density and rho_v sweeps, CSV records and summaries."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .environment import WorldGenConfig, default_endpoints, generate_world
from .homotopy import (
    BoundaryInfeasibleError,
    DegenerateGapError,
    PathMetrics,
    SolvedPath,
    build_boundary_paths,
    path_metrics,
    regular_terminal,
    solved_from_path_set,
)
from .planner import PlannerConfig, find_max_radius, plan
from .rrt_star import plan_baseline_rrt_star

ALGORITHMS = ("tube", "baseline")


@dataclass
class ExperimentSpec:
    obstacle_counts: List[int] = field(default_factory=lambda: [20, 40, 60, 80])
    rho_v: List[float] = field(default_factory=lambda: [0.15, 0.0])
    trials: int = 30
    base_seed: int = 0
    algorithms: List[str] = field(default_factory=lambda: ["tube", "baseline"])
    world_size: Tuple[float, float, float] = (25.0, 25.0, 3.0)
    footprint: Tuple[float, float, float] = (1.0, 1.0, 3.0)
    samples: int = 5000
    time_budget: Optional[float] = None
    rho_d: float = 1.0
    sigma_v: float = 1413.7
    epsilon: float = 0.01
    r_min: float = 0.1
    r_max: float = 2.0
    terminal_radius: float = 0.5
    terminal_vertices: int = 4

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.obstacle_counts or not self.algorithms:
            raise ValueError("sweeps must be non-empty")
        if "tube" in self.algorithms and not self.rho_v:
            raise ValueError("rho_v sweep must be non-empty")
        bad = set(self.algorithms) - set(ALGORITHMS)
        if bad:
            raise ValueError(f"unknown algorithms {sorted(bad)}")
        self.world_size = tuple(self.world_size)
        self.footprint = tuple(self.footprint)

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        data = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown spec fields {sorted(unknown)}")
        return cls(**data)

    def cells(self) -> List[Tuple[str, Optional[float], int]]:
        out = []
        for alg in self.algorithms:
            for rho in self.rho_v if alg == "tube" else [None]:
                for count in self.obstacle_counts:
                    out.append((alg, rho, count))
        return out

    def planner_config(self, seed: int, rho_v: Optional[float]) -> PlannerConfig:
        return PlannerConfig(
            rho_d=self.rho_d,
            rho_v=0.0 if rho_v is None else rho_v,
            sigma_v=self.sigma_v,
            epsilon=self.epsilon,
            r_min=self.r_min,
            r_max=self.r_max,
            max_samples=self.samples,
            time_budget=self.time_budget,
            seed=seed,
        )


@dataclass
class RunRecord:
    algorithm: str
    rho_v: Optional[float]
    obstacles: int
    trial: int
    seed: int
    success: bool
    metrics: Optional[PathMetrics]
    cost: float
    nodes: int
    wall_time: float
    error: str = ""

    def __post_init__(self):
        if self.success != (self.metrics is not None):
            raise ValueError("metrics must be present exactly when the run succeeded")


def run_trial(spec: ExperimentSpec, cell: Tuple[str, Optional[float], int], trial: int) -> RunRecord:
    alg, rho, count = cell
    seed = spec.base_seed + trial
    base = dict(algorithm=alg, rho_v=rho, obstacles=count, trial=trial, seed=seed)
    try:
        env = generate_world(WorldGenConfig(size=spec.world_size, obstacle_count=count, footprint=spec.footprint, seed=seed))
        start, goal = default_endpoints(spec.world_size)
        cfg = spec.planner_config(seed, rho)
        if alg == "tube":
            res = plan(env, cfg, start, goal)
            if not res.success:
                return RunRecord(**base, success=False, metrics=None, cost=math.inf, nodes=len(res.tree), wall_time=res.wall_time)
            axis = goal - start
            terms = (
                regular_terminal(start, axis, spec.terminal_radius, spec.terminal_vertices),
                regular_terminal(goal, axis, spec.terminal_radius, spec.terminal_vertices),
            )
            try:
                ps = build_boundary_paths(res.center_path(), terms, env)
            except (BoundaryInfeasibleError, DegenerateGapError) as exc:
                return RunRecord(
                    **base, success=False, metrics=None, cost=res.best_cost, nodes=len(res.tree), wall_time=res.wall_time, error=str(exc)
                )
            m = path_metrics(solved_from_path_set(env, ps))
            return RunRecord(**base, success=True, metrics=m, cost=res.best_cost, nodes=len(res.tree), wall_time=res.wall_time)
        res = plan_baseline_rrt_star(env, cfg, start, goal)
        if not res.success:
            return RunRecord(**base, success=False, metrics=None, cost=math.inf, nodes=res.node_count, wall_time=res.wall_time)
        # sphere-equivalent gap: clearance ball at every path vertex
        radii = np.array([find_max_radius(env, p, cfg.r_max) for p in res.path])
        m = path_metrics(SolvedPath(env, res.path, radii))
        return RunRecord(**base, success=True, metrics=m, cost=res.cost, nodes=res.node_count, wall_time=res.wall_time)
    except Exception as exc:  # a failed trial is data, not a batch abort
        return RunRecord(**base, success=False, metrics=None, cost=math.inf, nodes=0, wall_time=0.0, error=f"{type(exc).__name__}: {exc}")


def _run_job(args):
    return run_trial(*args)


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> List[RunRecord]:
    cells = spec.cells()
    work = [(spec, cell, t) for cell in cells for t in range(spec.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_job, work, chunksize=1))
    else:
        records = [_run_job(w) for w in work]
    order = {c: k for k, c in enumerate(cells)}
    records.sort(key=lambda r: (order[(r.algorithm, r.rho_v, r.obstacles)], r.trial))
    return records


# --- CSV ------------------------------------------------------------------------------

RECORD_COLUMNS = ["algorithm", "rho_v", "obstacles", "trial", "seed", "success", "apl", "mgv", "vsd", "cost", "nodes", "error"]
SUMMARY_METRICS = ["apl", "mgv", "vsd"]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def records_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_COLUMNS)
    for r in records:
        m = r.metrics
        w.writerow(
            [
                r.algorithm,
                _fmt(r.rho_v),
                r.obstacles,
                r.trial,
                r.seed,
                _fmt(r.success),
                _fmt(m.apl if m else None),
                _fmt(m.mgv if m else None),
                _fmt(m.vsd if m else None),
                _fmt(float(r.cost)),
                r.nodes,
                r.error,
            ]
        )
    return buf.getvalue()


def timings_csv(records: Sequence[RunRecord]) -> str:
    lines = ["algorithm,rho_v,obstacles,trial,wall_time"]
    lines += [f"{r.algorithm},{_fmt(r.rho_v)},{r.obstacles},{r.trial},{r.wall_time!r}" for r in records]
    return "\n".join(lines) + "\n"


def read_records_csv(path) -> List[RunRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            ok = row["success"] == "1"
            metrics = PathMetrics(float(row["apl"]), float(row["mgv"]), float(row["vsd"])) if ok else None
            out.append(
                RunRecord(
                    algorithm=row["algorithm"],
                    rho_v=float(row["rho_v"]) if row["rho_v"] else None,
                    obstacles=int(row["obstacles"]),
                    trial=int(row["trial"]),
                    seed=int(row["seed"]),
                    success=ok,
                    metrics=metrics,
                    cost=float(row["cost"]),
                    nodes=int(row["nodes"]),
                    wall_time=math.nan,
                    error=row["error"],
                )
            )
    return out


# --- summaries -----------------------------------------------------------------------


def summarize(records: Sequence[RunRecord]) -> List[dict]:
    """Per (algorithm, rho_v, obstacles) cell: success rate and quartiles of each metric."""
    groups: Dict[tuple, List[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.algorithm, r.rho_v, r.obstacles), []).append(r)
    rows = []
    for (alg, rho, count), rs in groups.items():
        ok = [r.metrics for r in rs if r.success]
        row = {"algorithm": alg, "rho_v": rho, "obstacles": count, "trials": len(rs), "success_rate": len(ok) / len(rs)}
        for name in SUMMARY_METRICS:
            vals = np.array([getattr(m, name) for m in ok], dtype=float)
            if len(vals):
                q1, med, q3 = np.percentile(vals, [25, 50, 75])
            else:
                q1 = med = q3 = math.nan
            row[f"{name}_q1"], row[f"{name}_median"], row[f"{name}_q3"] = float(q1), float(med), float(q3)
        rows.append(row)
    return rows


SUMMARY_COLUMNS = ["algorithm", "rho_v", "obstacles", "trials", "success_rate"] + [
    f"{m}_{q}" for m in SUMMARY_METRICS for q in ("q1", "median", "q3")
]


def summary_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def read_summary_csv(path) -> List[dict]:
    rows = []
    with open(path, newline="") as fh:
        for raw in csv.DictReader(fh):
            row = {"algorithm": raw["algorithm"], "rho_v": float(raw["rho_v"]) if raw["rho_v"] else None}
            row["obstacles"] = int(raw["obstacles"])
            row["trials"] = int(raw["trials"])
            for c in SUMMARY_COLUMNS[4:]:
                row[c] = float(raw[c])
            rows.append(row)
    return rows


def write_outputs(records: Sequence[RunRecord], out_dir) -> List[dict]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "records.csv").write_text(records_csv(records))
    (out / "timings.csv").write_text(timings_csv(records))
    rows = summarize(records)
    (out / "summary.csv").write_text(summary_csv(rows))
    return rows
