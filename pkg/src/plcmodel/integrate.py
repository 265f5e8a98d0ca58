"""Adaptive integration of the PC system, terminal fates and separatrices.

The stepper is the Dormand-Prince 5(4) embedded pair (FSAL) with a PI step
size controller, written for the two-component system on plain floats: the
state is tiny, so per-step Python overhead dominates and numpy would only
add to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import TAU_DOM, ModelParams, Regime, State, classify_regime, make_state, project_to_simplex
from .critical import (
    FISH_TRAP,
    TAU_SEC,
    CriticalSet,
    Stability,
    _raw_sector,
    critical_points,
    label_for,
)

EPS_CONV = 1e-6
HORIZONS = (1e3, 1e4, 1e5)
DEFAULT_TOL = (1e-12, 1e-10)  # (abs, rel)
SEPARATRIX_OFFSET = 1e-6

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# difference between the 5th and embedded 4th order weights
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

_SAFETY = 0.9
_PI_ALPHA = 0.7 / 5
_PI_BETA = 0.4 / 5
_FAC_MIN, _FAC_MAX = 0.2, 10.0


class IntegrationError(RuntimeError):
    """Step size underflow or a non-finite state."""

    def __init__(self, msg, t=None, state=None):
        super().__init__(msg)
        self.t = t
        self.state = state


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    max_error: float = 0.0  # largest accepted scaled local error estimate

    def as_dict(self):
        return {"accepted": self.accepted, "rejected": self.rejected, "max_local_error": self.max_error}


def dopri45(
    rhs,
    x0: float,
    y0: float,
    t_end: float,
    atol: float,
    rtol: float,
    h0: float,
    hmin: float,
    post=None,
    stop=None,
    t_eval=None,
):
    """Integrate ``(x, y)' = rhs(x, y)`` from t=0 towards ``t_end``.

    ``post(x, y)`` maps every accepted state (e.g. projection), ``stop(t, x, y)``
    ends the run early when it returns True.  When ``t_eval`` is given, steps
    are shortened to land on each of its times exactly.

    Returns ``(ts, xs, ys, stats)`` where the lists hold every accepted step.
    """
    t, x, y = 0.0, x0, y0
    ts, xs, ys = [t], [x], [y]
    stats = StepStats()
    h = min(h0, t_end)
    err_prev = 1.0
    k1x, k1y = rhs(x, y)
    targets = sorted(t_eval) if t_eval is not None else []
    ti = 0
    while ti < len(targets) and targets[ti] <= 0.0:
        ti += 1
    rejected_last = False

    while t < t_end:
        stop_at = targets[ti] if ti < len(targets) else t_end
        landing = False
        h_ctrl = h
        if t + h >= stop_at:
            h = stop_at - t
            landing = True
        if h < hmin and not landing:
            raise IntegrationError(f"step size underflow (h={h:.3g}) at t={t:.6g}", t, (x, y))

        k2x, k2y = rhs(x + h * _A21 * k1x, y + h * _A21 * k1y)
        k3x, k3y = rhs(x + h * (_A31 * k1x + _A32 * k2x), y + h * (_A31 * k1y + _A32 * k2y))
        k4x, k4y = rhs(
            x + h * (_A41 * k1x + _A42 * k2x + _A43 * k3x),
            y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y),
        )
        k5x, k5y = rhs(
            x + h * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x),
            y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y),
        )
        k6x, k6y = rhs(
            x + h * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x),
            y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y),
        )
        xn = x + h * (_B1 * k1x + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
        yn = y + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
        k7x, k7y = rhs(xn, yn)
        ex = h * (_E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
        ey = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
        sx = atol + rtol * max(abs(x), abs(xn))
        sy = atol + rtol * max(abs(y), abs(yn))
        err = max(abs(ex) / sx, abs(ey) / sy)
        if not math.isfinite(err):
            raise IntegrationError(f"non-finite state at t={t:.6g}", t, (x, y))

        if err <= 1.0:
            t = stop_at if landing else t + h
            if post is not None:
                xp, yp = post(xn, yn)
                if xp != xn or yp != yn:
                    xn, yn = xp, yp
                    k7x, k7y = rhs(xn, yn)
            x, y = xn, yn
            k1x, k1y = k7x, k7y
            ts.append(t)
            xs.append(x)
            ys.append(y)
            stats.accepted += 1
            stats.max_error = max(stats.max_error, err)
            if landing and ti < len(targets):
                ti += 1
            err_c = max(err, 1e-10)
            fac = _SAFETY * err_c ** -_PI_ALPHA * err_prev ** _PI_BETA
            fac = min(_FAC_MAX, max(_FAC_MIN, fac))
            if rejected_last:
                fac = min(fac, 1.0)
            # a landing step was artificially short; keep the controller's step
            h = max(h * fac, h_ctrl) if landing else h * fac
            err_prev = err_c
            rejected_last = False
            if stop is not None and stop(t, x, y):
                break
        else:
            stats.rejected += 1
            h *= max(_FAC_MIN, _SAFETY * err ** -0.2)
            rejected_last = True
    return ts, xs, ys, stats


@dataclass(frozen=True)
class Fate:
    """Where a trajectory ended up.

    ``kind`` is ``"converged"`` or ``"undecided"``; ``target`` names the
    nearest critical object (C0, Cx, Cy, C or SegmentPoint) and
    ``location`` is that object's closest point.
    """

    kind: str
    target: str | None
    location: State | None
    distance_at_end: float
    horizon: float

    @property
    def converged(self) -> bool:
        return self.kind == "converged"

    @property
    def label(self) -> str | None:
        return label_for(self.target, self.location) if self.converged else None

    def as_dict(self):
        return {
            "kind": self.kind,
            "target": self.target,
            "location": None if self.location is None else [self.location.x, self.location.y],
            "distance_at_end": self.distance_at_end,
            "horizon": self.horizon,
            "label": self.label,
        }


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    params: ModelParams
    fate: Fate
    step_stats: StepStats = field(default_factory=StepStats)

    @property
    def samples(self) -> list[tuple[float, State]]:
        return [(float(t), State(float(x), float(y))) for t, x, y in zip(self.t, self.x, self.y)]

    @property
    def final(self) -> State:
        return State(float(self.x[-1]), float(self.y[-1]))

    def __len__(self):
        return len(self.t)


def _rhs_for(p: ModelParams, sign: float = 1.0):
    a, b, g, d = p.as_tuple()
    if sign < 0:
        a, b, g, d = -a, -b, -g, -d

    def rhs(x, y):
        return (a * x * (1.0 - x) - b * x * y, g * y * (1.0 - y) - d * x * y)

    return rhs


def _clamped_rhs(p: ModelParams):
    # evaluate on the clamped state so intermediate stages never see x+y>1
    a, b, g, d = p.as_tuple()

    def rhs(x, y):
        x, y = project_to_simplex(x, y)
        return (a * x * (1.0 - x) - b * x * y, g * y * (1.0 - y) - d * x * y)

    return rhs


def _decide(cs: CriticalSet, p: ModelParams, x: float, y: float, eps: float):
    dist, kind, loc = cs.nearest(x, y)
    a, b, g, d = p.as_tuple()
    fx = a * x * (1.0 - x) - b * x * y
    fy = g * y * (1.0 - y) - d * x * y
    return dist < eps and math.hypot(fx, fy) < eps, dist, kind, loc


def integrate(
    p: ModelParams,
    s0,
    horizon: float,
    tol: tuple[float, float] = DEFAULT_TOL,
    stop_on_fate: bool = True,
    t_eval=None,
    eps_conv: float = EPS_CONV,
    critical: CriticalSet | None = None,
) -> Trajectory:
    """Integrate the PC system from ``s0`` over ``[0, horizon]``.

    Every accepted state is projected onto the simplex and a component that
    starts at exactly zero is held at zero.  With ``stop_on_fate`` the run
    ends at the first step where both the distance to the nearest critical
    object and the speed are below ``eps_conv``.
    """
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    atol, rtol = tol
    if not (atol > 0 and rtol > 0):
        raise ValueError("tolerances must be positive")
    s0 = s0 if isinstance(s0, State) else make_state(*s0)
    cs = critical if critical is not None else critical_points(p)
    zero_x, zero_y = s0.x == 0.0, s0.y == 0.0

    def post(x, y):
        x, y = project_to_simplex(x, y)
        return (0.0 if zero_x else x, 0.0 if zero_y else y)

    a, b, g, d = p.as_tuple()

    def converged(t, x, y):
        fx = a * x * (1.0 - x) - b * x * y
        fy = g * y * (1.0 - y) - d * x * y
        if abs(fx) >= eps_conv or abs(fy) >= eps_conv:
            return False
        return _decide(cs, p, x, y, eps_conv)[0]

    ts, xs, ys, stats = dopri45(
        _clamped_rhs(p),
        s0.x,
        s0.y,
        horizon,
        atol,
        rtol,
        h0=horizon * 1e-4,
        hmin=horizon * 1e-12,
        post=post,
        stop=converged if stop_on_fate else None,
        t_eval=t_eval,
    )
    ok, dist, kind, loc = _decide(cs, p, xs[-1], ys[-1], eps_conv)
    fate = Fate("converged" if ok else "undecided", kind, loc, dist, horizon)
    return Trajectory(np.array(ts), np.array(xs), np.array(ys), p, fate, stats)


def settle(p: ModelParams, s0, tol: tuple[float, float] = DEFAULT_TOL, horizons=HORIZONS) -> Trajectory:
    """Integrate with escalating horizons until the fate is decided.

    Returns the trajectory of the last attempt; its ``fate`` is
    ``undecided`` only if the largest horizon was not enough.
    """
    cs = critical_points(p)
    traj = None
    for H in horizons:
        traj = integrate(p, s0, H, tol=tol, critical=cs)
        if traj.fate.converged:
            break
    return traj


def fate(p: ModelParams, s0, tol: tuple[float, float] = DEFAULT_TOL) -> Fate:
    return settle(p, s0, tol).fate


def trap_violations(traj: Trajectory, tol: float = TAU_SEC) -> int:
    """Number of samples outside the fish trap after the first one inside it."""
    p = traj.params
    entered = False
    bad = 0
    for x, y in zip(traj.x, traj.y):
        sec = _raw_sector(p, float(x), float(y), tol)
        if entered and sec not in FISH_TRAP:
            bad += 1
        elif sec in FISH_TRAP:
            entered = True
    return bad


def _to_boundary(x0, y0, x1, y1):
    """Point where the segment from an inside point (x0, y0) to (x1, y1) leaves the simplex."""
    u = 1.0
    if x1 < 0:
        u = min(u, x0 / (x0 - x1))
    if y1 < 0:
        u = min(u, y0 / (y0 - y1))
    if x1 + y1 > 1:
        u = min(u, (1 - x0 - y0) / ((x1 + y1) - (x0 + y0)))
    return x0 + u * (x1 - x0), y0 + u * (y1 - y0)


def trace_separatrix(
    p: ModelParams,
    arc_length_budget: float = 10.0,
    eta: float = SEPARATRIX_OFFSET,
    tol: tuple[float, float] = DEFAULT_TOL,
    max_time: float = 1e4,
):
    """Both branches of the stable manifold of the saddle C.

    Each branch starts at C, steps ``eta`` along the attracting eigendirection
    and follows the time-reversed flow until it leaves the simplex, comes
    within ``EPS_CONV`` of another critical point, or its arc length exceeds
    the budget.  Returns two ``(n, 2)`` arrays, each beginning at C.
    """
    regime = classify_regime(p)
    if regime is not Regime.GENERIC:
        raise ValueError(f"separatrix needs the generic regime, got {regime.value}")
    cs = critical_points(p)
    c = cs.by_kind("C")
    if c.stability is not Stability.SADDLE:
        raise ValueError(f"interior point is {c.stability.value}, not a saddle")
    vx, vy = c.stable_direction
    rhs = _rhs_for(p, -1.0)
    others = [q.location for q in cs.points if q.kind != "C"]
    atol, rtol = tol

    branches = []
    for sgn in (1.0, -1.0):
        x0 = c.location.x + sgn * eta * vx
        y0 = c.location.y + sgn * eta * vy
        arc = [0.0]
        last = [x0, y0]

        def stop(t, x, y, arc=arc, last=last):
            arc[0] += math.hypot(x - last[0], y - last[1])
            last[0], last[1] = x, y
            if x < 0 or y < 0 or x + y > 1 or arc[0] > arc_length_budget:
                return True
            return any(math.hypot(x - q.x, y - q.y) < EPS_CONV for q in others)

        ts, xs, ys, _ = dopri45(rhs, x0, y0, max_time, atol, rtol, h0=1e-3, hmin=1e-14, stop=stop)
        pts = [(c.location.x, c.location.y)] + list(zip(xs, ys))
        xe, ye = pts[-1]
        if xe < 0 or ye < 0 or xe + ye > 1:
            pts[-1] = _to_boundary(*pts[-2], xe, ye)
        branches.append(np.array(pts))
    return branches[0], branches[1]


def straddle_seeds(branch, offset: float = 1e-3, frac: float = 0.5):
    """Two states ``offset`` away on either side of a separatrix branch.

    The base point sits at ``frac`` of the branch's arc length; if either
    seed would leave the simplex it slides back towards the saddle.
    """
    br = np.asarray(branch, dtype=float)
    seg = np.hypot(*np.diff(br, axis=0).T)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    k = int(np.clip(np.searchsorted(arc, frac * arc[-1]), 1, len(br) - 2))
    while k >= 1:
        tx, ty = br[k + 1] - br[k - 1]
        n = math.hypot(tx, ty)
        if n > 0:
            nx, ny = -ty / n, tx / n
            x, y = br[k]
            pts = [(x + offset * nx, y + offset * ny), (x - offset * nx, y - offset * ny)]
            if all(u >= 0 and v >= 0 and u + v <= 1 for u, v in pts):
                return State(*pts[0]), State(*pts[1])
        k -= 1
    raise ValueError("no branch point leaves room for the requested offset")


@dataclass
class PeriodicityReport:
    crossings: list[tuple[float, float, float]]  # (t, x, y) of same-direction section crossings
    recurrences: list[tuple[int, int, float]]  # (i, j, distance) of near-coincident crossings
    fate: Fate
    trajectory: Trajectory | None = None

    @property
    def periodic(self) -> bool:
        return bool(self.recurrences)


def falsify_periodicity(
    p: ModelParams,
    s0,
    horizon: float | None = None,
    radius: float = 1e-4,
    tol: tuple[float, float] = DEFAULT_TOL,
) -> PeriodicityReport:
    """Look for closed orbits through ``s0`` with a Poincare section.

    The section is the line through ``s0`` orthogonal to the initial
    velocity.  Every crossing in the initial direction is recorded; a
    recurrence is a crossing within ``radius`` of an earlier one (or of
    ``s0``) that happens away from every critical object, so a trajectory
    settling onto a critical point on the section does not count.
    """
    s0 = s0 if isinstance(s0, State) else make_state(*s0)
    if not (s0.x > 0 and s0.y > 0 and s0.x + s0.y < 1):
        raise ValueError("periodicity check needs an interior starting point")
    cs = critical_points(p)
    a, b, g, d = p.as_tuple()
    vx = a * s0.x * (1 - s0.x) - b * s0.x * s0.y
    vy = g * s0.y * (1 - s0.y) - d * s0.x * s0.y
    if math.hypot(vx, vy) < EPS_CONV or cs.nearest(s0.x, s0.y)[0] < EPS_CONV:
        raise ValueError("starting point is (numerically) critical")

    traj = settle(p, s0, tol) if horizon is None else integrate(p, s0, horizon, tol=tol, critical=cs)
    side = (traj.x - s0.x) * vx + (traj.y - s0.y) * vy
    crossings = [(0.0, s0.x, s0.y)]
    for k in range(1, len(side)):
        if side[k - 1] < 0 <= side[k]:
            w = side[k - 1] / (side[k - 1] - side[k])
            crossings.append(
                (
                    float(traj.t[k - 1] + w * (traj.t[k] - traj.t[k - 1])),
                    float(traj.x[k - 1] + w * (traj.x[k] - traj.x[k - 1])),
                    float(traj.y[k - 1] + w * (traj.y[k] - traj.y[k - 1])),
                )
            )
    recurrences = []
    for j in range(1, len(crossings)):
        _, xj, yj = crossings[j]
        if cs.nearest(xj, yj)[0] < 10 * EPS_CONV:
            continue
        for i in range(j):
            dist = math.hypot(xj - crossings[i][1], yj - crossings[i][2])
            if dist < radius:
                recurrences.append((i, j, dist))
    return PeriodicityReport(crossings, recurrences, traj.fate, traj)


def in_band(traj: Trajectory, tol: float = TAU_DOM) -> bool:
    return bool(
        np.all(traj.x >= -tol) and np.all(traj.y >= -tol) and np.all(traj.x + traj.y <= 1 + tol)
    )
