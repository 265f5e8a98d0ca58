"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math
import time
from importlib.resources import files

import numpy as np
import pytest

from plcmodel.core import ModelParams, State, vector_field
from plcmodel.critical import Stability, critical_points, interior_point, jacobian, nullclines
from plcmodel.fit import Dataset, fit, load_csv, model_eval
from plcmodel.integrate import (
    EPS_CONV,
    falsify_periodicity,
    fate,
    integrate,
    settle,
    straddle_seeds,
    trace_separatrix,
    trap_violations,
)

WURDE = ModelParams(0.6142, 2.6240, 2.1509, 4.2129)
EPITHESIS = (0.1076, 2.3732, 0.0377, -1.1806, 0.0618, 0.0001)


def line(report, n, ok, detail):
    report(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def random_generic(rng):
    lo, hi = math.log(0.05), math.log(5.0)
    a, db, g, dd = np.exp(rng.uniform(lo, hi, 4))
    return ModelParams(a, a + db, g, g + dd)


def random_interior(rng, margin=1e-3):
    while True:
        x, y = rng.dirichlet((1.0, 1.0, 1.0))[:2]
        if x > margin and y > margin and x + y < 1 - margin:
            return State(float(x), float(y))


def test_criterion_1_logistic_oracle(report):
    rng = np.random.default_rng(1)
    t = np.linspace(0.0, 20.0, 201)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        alpha = rng.uniform(0.05, 3.0)
        x0 = rng.uniform(0.001, 0.99)
        p = ModelParams(alpha, alpha + rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0), 3.5)
        traj = integrate(p, State(x0, 0.0), 20.0, stop_on_fate=False, t_eval=t)
        keep = np.isin(traj.t, t)
        exact = 1.0 / (1.0 + np.exp(-alpha * traj.t[keep] + math.log(1 / x0 - 1)))
        assert keep.sum() == len(t)
        worst = max(worst, float(np.max(np.abs(traj.x[keep] - exact))))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and elapsed < 5.0
    line(report, 1, ok, f"max abs error {worst:.2e} (< 1e-6), {elapsed:.2f}s (< 5s)")
    assert ok


def test_criterion_2_jacobian(report):
    rng = np.random.default_rng(2)
    h = 1e-6
    g = (np.arange(20) + 0.5) / 20
    grid = [(x, y) for x in g for y in g if x + y <= 1.0]
    worst = 0.0
    bad_signs = 0
    expected = {"C0": Stability.SOURCE, "Cx": Stability.SINK, "Cy": Stability.SINK, "C": Stability.SADDLE}
    for _ in range(100):
        p = random_generic(rng)
        for x, y in grid:
            J = np.array(jacobian(p, (x, y)))
            cols = []
            for dx, dy in ((h, 0.0), (0.0, h)):
                fp = np.array(vector_field(p, (x + dx, y + dy)))
                fm = np.array(vector_field(p, (x - dx, y - dy)))
                cols.append((fp - fm) / (2 * h))
            worst = max(worst, float(np.max(np.abs(J - np.column_stack(cols)))))
        for cp in critical_points(p).points:
            re = sorted(v.real for v in cp.eigenvalues)
            signs = {Stability.SOURCE: re[0] > 0, Stability.SINK: re[1] < 0, Stability.SADDLE: re[0] < 0 < re[1]}
            if cp.stability is not expected[cp.kind] or not signs[expected[cp.kind]]:
                bad_signs += 1
    ok = worst < 1e-6 and bad_signs == 0
    line(report, 2, ok, f"max FD error {worst:.2e} (< 1e-6) on {len(grid)} points x 100 sets, sign mismatches {bad_signs}")
    assert ok


@pytest.fixture(scope="module")
def criterion_3_runs():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    reports = []
    for _ in range(200):
        p = random_generic(rng)
        cs = critical_points(p)
        for _ in range(5):
            s0 = random_interior(rng)
            while cs.nearest(s0.x, s0.y)[0] < 1e-4:
                s0 = random_interior(rng)
            reports.append(falsify_periodicity(p, s0))
    return reports, time.perf_counter() - start


def test_criterion_3_convergence_no_cycles(report, criterion_3_runs):
    reports, elapsed = criterion_3_runs
    converged = sum(r.fate.converged and r.fate.distance_at_end < EPS_CONV for r in reports)
    recurrences = sum(len(r.recurrences) for r in reports)
    ok = converged == len(reports) and recurrences == 0 and elapsed < 120.0
    line(
        report,
        3,
        ok,
        f"{converged}/{len(reports)} converged within 1e-6, {recurrences} recurrences, {elapsed:.1f}s (< 120s)",
    )
    assert ok


def test_criterion_4_fish_trap(report, criterion_3_runs):
    reports, _ = criterion_3_runs
    violations = sum(trap_violations(r.trajectory) for r in reports)
    samples = sum(len(r.trajectory) for r in reports)
    ok = violations == 0
    line(report, 4, ok, f"{violations} trap exits over {samples} accepted steps in {len(reports)} runs")
    assert ok


def test_criterion_5_interior_point(report):
    rng = np.random.default_rng(5)
    worst = 0.0
    outside = 0
    for _ in range(1000):
        p = random_generic(rng)
        nc = nullclines(p)
        A = np.array([[nc.g_x.a, nc.g_x.b], [nc.g_y.a, nc.g_y.b]])
        solved = np.linalg.solve(A, [nc.g_x.c, nc.g_y.c])
        cx, cy = interior_point(p)
        worst = max(worst, float(np.max(np.abs(solved - (cx, cy)))))
        outside += not (cx >= 0 and cy >= 0 and cx + cy <= 1)
    wx, wy = interior_point(WURDE)
    dw = max(abs(wx - 0.4441), abs(wy - 0.1301))
    ok = worst < 1e-10 and outside == 0 and dw < 1e-3
    line(report, 5, ok, f"formula vs solve {worst:.2e} (< 1e-10), {outside} outside, wurde C=({wx:.4f}, {wy:.4f})")
    assert ok


def test_criterion_6_recovery(report):
    rng = np.random.default_rng(2024)
    t = np.arange(15.0)
    start = time.perf_counter()
    clean_ok = noisy_ok = 0
    for k in range(20):
        a = rng.uniform(0.3, 1.0)
        b = a + rng.uniform(0.5, 2.5)
        g = rng.uniform(0.5, 2.5)
        d = g + rng.uniform(0.5, 2.5)
        theta = [a, b, g, d, rng.uniform(0.005, 0.05), rng.uniform(5e-4, 5e-3)]
        f = model_eval("plc", theta, t)
        res = fit("plc", Dataset(t, f), multistart=8, seed=k)
        clean_ok += res.rmse < 1e-6
        noise = 0.01 * f * rng.standard_normal(len(t))
        fn = np.clip(f + noise, 0.0, 1.0)
        res = fit("plc", Dataset(t, fn), multistart=8, seed=k)
        traj_rmse = math.sqrt(np.mean((res.predict(t) - f) ** 2))
        noisy_ok += traj_rmse <= 2 * math.sqrt(np.mean(noise**2))
    elapsed = time.perf_counter() - start
    ok = noisy_ok >= 18 and clean_ok == 20 and elapsed < 180.0
    line(report, 6, ok, f"noisy {noisy_ok}/20 (>= 18), zero-noise {clean_ok}/20 (= 20), {elapsed:.1f}s (< 180s)")
    assert ok


def test_criterion_7_separatrix(report):
    rng = np.random.default_rng(7)
    good = 0
    for _ in range(20):
        p = random_generic(rng)
        fates = []
        for br in trace_separatrix(p):
            s1, s2 = straddle_seeds(br, 1e-3)
            fates.append({fate(p, s1).target, fate(p, s2).target})
        good += all(f == {"Cx", "Cy"} for f in fates)
    ok = good >= 19
    line(report, 7, ok, f"{good}/20 sets with opposite fates on every branch (>= 19)")
    assert ok


def test_criterion_8_appendix(report):
    bundled = [p.name for p in (files("plcmodel") / "data").iterdir() if p.name.endswith(".csv")]
    digitized = [n for n in bundled if not n.startswith("synthetic_")]
    if not digitized:
        report(f"criterion 8: SKIPPED  no digitized datasets bundled (only {', '.join(sorted(bundled))})")
        pytest.skip("no digitized datasets bundled")
    data = load_csv(files("plcmodel") / "data" / "wurde.csv")
    pa = fit("pa", data)
    plc = fit("plc", data)
    a, b, _ = pa.theta
    ok = abs(a / 70.4286 - 1) <= 0.05 and abs(b / 0.4642 - 1) <= 0.05 and plc.rss <= pa.rss
    line(report, 8, ok, f"a={a:.4f} b={b:.4f}, rss plc {plc.rss:.3e} <= pa {pa.rss:.3e}")
    assert ok


def test_criterion_9_epithesis(report):
    p = ModelParams(*EPITHESIS[:4])
    traj = settle(p, State(*EPITHESIS[4:]))
    xdot = np.array([vector_field(p, (x, y))[0] for x, y in zip(traj.x, traj.y)])
    # x underflows to exactly zero in the tail; a zero is not a sign
    significant = xdot[xdot != 0]
    changes = int(np.sum(np.diff(np.sign(significant)) != 0))
    k = int(np.argmax(traj.x))
    ok = changes == 1 and significant[0] > 0 and traj.x[-1] < 1e-5
    line(report, 9, ok, f"{changes} sign change of x' (= 1), peak x={traj.x[k]:.3f} at t={traj.t[k]:.1f}, final x={traj.x[-1]:.1e}")
    assert ok
