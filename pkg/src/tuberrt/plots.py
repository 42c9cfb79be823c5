"""Static SVG output: metric-vs-obstacle panels and top-down world renderings."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .environment import BoxObstacle, Environment, SphereObstacle

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
METRIC_LABELS = {
    "apl": "APL (m)",
    "mgv": "MGV (m^3)",
    "vsd": "VSD (m^2)",
    "success_rate": "success rate",
}


def _svg(width, height, body: List[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _ticks(lo, hi, n=5):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    return list(np.linspace(lo, hi, n))


def _series_label(alg, rho):
    return alg if rho is None else f"{alg} rho_v={rho:g}"


def metric_panel(rows: Sequence[dict], metric: str, width=420, height=300) -> str:
    """One panel: median ``metric`` vs obstacle count, a series per (algorithm, rho_v)."""
    left, right, top, bottom = 60, 130, 20, 40
    pw, ph = width - left - right, height - top - bottom
    key = metric if metric == "success_rate" else f"{metric}_median"
    series: Dict[tuple, List[tuple]] = {}
    for r in rows:
        series.setdefault((r["algorithm"], r["rho_v"]), []).append((r["obstacles"], r[key]))
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts if math.isfinite(y)]
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y0, y1 = (min(0.0, min(ys)), max(ys)) if ys else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    body = [
        f'<line class="axis" x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line class="axis" x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
        f'<text x="{left + pw / 2}" y="{height - 8}" text-anchor="middle">obstacles</text>',
        f'<text x="14" y="{top + ph / 2}" transform="rotate(-90 14 {top + ph / 2})" text-anchor="middle">'
        f"{escape(METRIC_LABELS.get(metric, metric))}</text>",
    ]
    for t in _ticks(x0, x1):
        body.append(f'<text x="{sx(t):.1f}" y="{top + ph + 14}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        body.append(f'<text x="{left - 4}" y="{sy(t) + 4:.1f}" text-anchor="end">{t:.3g}</text>')
    for k, ((alg, rho), pts) in enumerate(sorted(series.items(), key=lambda kv: (kv[0][0], kv[0][1] or 0.0))):
        color = PALETTE[k % len(PALETTE)]
        pts = sorted(p for p in pts if math.isfinite(p[1]))
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        body.append(f'<polyline class="series" points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in pts:
            body.append(f'<circle class="marker" cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>')
        ly = top + 14 * k + 8
        body.append(f'<text x="{left + pw + 8}" y="{ly}" fill="{color}">{escape(_series_label(alg, rho))}</text>')
    return _svg(width, height, body)


def emit_plots(rows: Sequence[dict], out_dir, metrics=("apl", "mgv", "vsd", "success_rate")) -> List[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for metric in metrics:
        path = out / f"{metric}.svg"
        path.write_text(metric_panel(rows, metric))
        written.append(path)
    return written


def world_svg(env: Environment, spheres=(), paths: Sequence = (), scale: float = 20.0, margin: float = 10.0) -> str:
    """Top-down (x, y) view: obstacles, path spheres as circles, polylines for paths.

    Box obstacles are the only ``rect`` elements and path spheres the only
    ``circle`` elements with class ``sphere``.
    """
    lo = np.array(env.bounds_min)
    ext = env.extent
    width = ext[0] * scale + 2 * margin
    height = ext[1] * scale + 2 * margin

    def px(p):
        return margin + (p[0] - lo[0]) * scale, margin + (lo[1] + ext[1] - p[1]) * scale

    x0, y0 = px(lo)
    x1, y1 = px(lo + ext)
    body = [f'<polygon class="bounds" points="{x0},{y0} {x1},{y0} {x1},{y1} {x0},{y1}" fill="none" stroke="black"/>']
    for ob in env.obstacles:
        if isinstance(ob, BoxObstacle):
            ax, ay = px((ob.min[0], ob.max[1]))
            w = (ob.max[0] - ob.min[0]) * scale
            h = (ob.max[1] - ob.min[1]) * scale
            body.append(f'<rect class="obstacle" x="{ax:.2f}" y="{ay:.2f}" width="{w:.2f}" height="{h:.2f}" fill="#888"/>')
        elif isinstance(ob, SphereObstacle):
            cx, cy = px(ob.center)
            body.append(f'<circle class="obstacle" cx="{cx:.2f}" cy="{cy:.2f}" r="{ob.radius * scale:.2f}" fill="#888"/>')
    for s in spheres:
        cx, cy = px(s.center)
        body.append(
            f'<circle class="sphere" cx="{cx:.2f}" cy="{cy:.2f}" r="{s.radius * scale:.2f}" '
            'fill="#1f77b4" fill-opacity="0.15" stroke="#1f77b4"/>'
        )
    for k, path in enumerate(paths):
        coords = " ".join("{:.2f},{:.2f}".format(*px(p)) for p in np.asarray(path))
        color = "#d62728" if k == 0 else "#2ca02c"
        body.append(f'<polyline class="path" points="{coords}" fill="none" stroke="{color}" stroke-width="1.2"/>')
    return _svg(round(width, 2), round(height, 2), body)


def save_world_svg(path, env: Environment, spheres=(), paths: Sequence = ()) -> None:
    Path(path).write_text(world_svg(env, spheres, paths))
