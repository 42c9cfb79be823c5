import numpy as np
import pytest
from hypothesis import settings

from tuberrt.environment import BoxObstacle, Environment, SphereObstacle

settings.register_profile("ci", deadline=None, max_examples=60)
settings.load_profile("ci")


def mc_lens_volume(c1, r1, c2, r2, n, rng):
    """Hit-count estimate of the overlap volume and its standard error.

    Samples the bounding box of the smaller sphere, which contains the lens.
    """
    c_s, r_s = (c1, r1) if r1 <= r2 else (c2, r2)
    box = (2 * r_s) ** 3
    pts = c_s + rng.uniform(-r_s, r_s, size=(n, 3))
    hit = (np.sum((pts - c1) ** 2, axis=1) < r1 * r1) & (np.sum((pts - c2) ** 2, axis=1) < r2 * r2)
    p = hit.mean()
    return box * p, box * np.sqrt(max(p * (1 - p), 1.0 / n) / n)


def hull_distance(x, pts):
    """Distance from x to the convex hull of pts (small QP by projected gradient on the simplex)."""
    from scipy.optimize import minimize

    k = len(pts)
    res = minimize(
        lambda w: np.sum((w @ pts - x) ** 2),
        np.full(k, 1.0 / k),
        jac=lambda w: 2 * pts @ (w @ pts - x),
        bounds=[(0, 1)] * k,
        constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1}],
        method="SLSQP",
        options={"ftol": 1e-20, "maxiter": 500},
    )
    return float(np.sqrt(max(res.fun, 0.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def mixed_env():
    obs = [
        SphereObstacle((3.0, 3.0, 3.0), 1.0),
        SphereObstacle((7.0, 2.0, 5.0), 1.5),
        BoxObstacle((5.0, 6.0, 0.0), (6.0, 8.0, 10.0)),
        BoxObstacle((1.0, 7.0, 2.0), (3.0, 9.0, 4.0)),
    ]
    return Environment((0, 0, 0), (10, 10, 10), obs)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion; shown in the terminal summary."""

    def _report(number: int, ok: bool, detail: str):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
