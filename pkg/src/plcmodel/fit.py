"""Least-squares fitting of the PC model and three logistic baselines.

Time is the dataset's own axis (the row index when no ``t`` column is
given).  All fits minimize the plain, unweighted sum of squared residuals.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ModelParams, ParameterError, classify_regime, make_state, project_to_simplex
from .critical import INCOMPLETE, COMPLETE, REVERSIBLE
from ._kernel import plc_paths
from .integrate import Fate, IntegrationError, fate

logger = logging.getLogger(__name__)

FIT_TOL = (1e-12, 1e-10)  # integrator (abs, rel) tolerance inside fits
FD_STEP = 1e-6
RTOL_RSS = 1e-10
GTOL = 1e-8
MAX_ITER = 500
# step budget per model evaluation; stiff parameter corners beyond it are
# treated as invalid points rather than integrated at great cost
MAX_STEPS = 20_000
_EXP_CLIP = 700.0


class ModelFamily(enum.Enum):
    PA = "pa"
    ALTMANN_K2 = "k2"
    ALTMANN_K3 = "k3"
    PLC = "plc"

    @property
    def names(self) -> tuple[str, ...]:
        return _PARAM_NAMES[self]

    @property
    def n_params(self) -> int:
        return len(_PARAM_NAMES[self])

    @property
    def title(self) -> str:
        return _TITLES[self]


_PARAM_NAMES = {
    ModelFamily.PA: ("a", "b", "c"),
    ModelFamily.ALTMANN_K2: ("a", "b", "c", "d"),
    ModelFamily.ALTMANN_K3: ("c", "k0", "k1", "k2", "k3"),
    ModelFamily.PLC: ("alpha", "beta", "gamma", "delta", "x0", "y0"),
}
_TITLES = {
    ModelFamily.PA: "Piotrowski-Altmann",
    ModelFamily.ALTMANN_K2: "Altmann k=2",
    ModelFamily.ALTMANN_K3: "Altmann k=3",
    ModelFamily.PLC: "PLC model",
}


def as_family(family) -> ModelFamily:
    return family if isinstance(family, ModelFamily) else ModelFamily(str(family).lower())


@dataclass(frozen=True)
class Dataset:
    t: np.ndarray
    f: np.ndarray
    label: str = ""

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        f = np.asarray(self.f, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "f", f)
        if t.ndim != 1 or t.shape != f.shape:
            raise ValueError("t and f must be one-dimensional and of equal length")
        if len(t) == 0:
            raise ValueError("dataset is empty")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(f))):
            raise ValueError("dataset contains non-finite values")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time points must be strictly increasing")
        if np.any(f < 0) or np.any(f > 1):
            raise ValueError("observed fractions must lie in [0, 1]")

    def __len__(self):
        return len(self.t)

    def head(self, n: int) -> Dataset:
        return Dataset(self.t[:n], self.f[:n], self.label)

    @classmethod
    def from_values(cls, values, label: str = "") -> Dataset:
        """Dataset on the row-index time axis 0, 1, 2, ..."""
        values = np.asarray(values, dtype=float)
        return cls(np.arange(len(values), dtype=float), values, label)


def load_csv(path, label: str | None = None) -> Dataset:
    """Read a ``t,value`` CSV.

    A header row is expected; a headerless two-column file is accepted with
    a warning.  A single-column file is read as values on the row index.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: no data rows")

    def numeric(row):
        try:
            [float(c) for c in row]
            return True
        except ValueError:
            return False

    if numeric(rows[0]):
        warnings.warn(f"{path}: no header row, reading columns as t,value", stacklevel=2)
        header, body = None, rows
    else:
        header, body = [c.strip().lower() for c in rows[0]], rows[1:]
    if not body:
        raise ValueError(f"{path}: no data rows")
    try:
        table = np.array([[float(c) for c in r] for r in body], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: malformed number ({exc})") from None
    if table.ndim != 2:
        raise ValueError(f"{path}: ragged rows")
    name = label if label is not None else path.stem
    if table.shape[1] == 1:
        return Dataset.from_values(table[:, 0], name)
    if header is not None and "t" in header and "value" in header:
        return Dataset(table[:, header.index("t")], table[:, header.index("value")], name)
    return Dataset(table[:, 0], table[:, 1], name)


def _logistic(c, a, z):
    # c / (1 + a * exp(-z)), guarded against overflow and clamped to [0, c]
    e = np.exp(np.clip(-z, -_EXP_CLIP, _EXP_CLIP))
    with np.errstate(over="ignore", invalid="ignore"):
        val = c / (1.0 + a * e)
    lo, hi = min(0.0, c), max(0.0, c)
    return np.clip(np.nan_to_num(val, nan=0.0, posinf=hi, neginf=lo), lo, hi)


def plc_params(theta) -> ModelParams:
    return ModelParams(*(float(v) for v in theta[:4]))


def model_eval(family, theta, t, tol=FIT_TOL):
    """Model prediction at time(s) ``t``; scalar in, scalar out."""
    family = as_family(family)
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (family.n_params,):
        raise ValueError(f"{family.title} takes {family.n_params} parameters, got {theta.shape}")
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if family is ModelFamily.PA:
        a, b, c = theta
        out = _logistic(c, a, b * t)
    elif family is ModelFamily.ALTMANN_K2:
        a, b, c, d = theta
        out = _logistic(c, a, b * t + d * t * t)
    elif family is ModelFamily.ALTMANN_K3:
        c, k0, k1, k2, k3 = theta
        out = _logistic(c, 1.0, k0 + t * (k1 + t * (k2 + t * k3)))
    else:
        out = _plc_curve(theta, t, tol)
    return float(out[0]) if scalar else out


def _plc_curve(theta, t, tol):
    return _plc_batch(np.asarray(theta, dtype=float)[None, :], t, tol)[0]


def _plc_batch(thetas, t, tol=FIT_TOL):
    """Progressive share for each row of ``thetas`` at times ``t``.

    All rows share one adaptive step sequence.
    """
    if np.any(t < 0):
        raise ValueError("PLC model is integrated forward from t=0")
    P = np.array(thetas, dtype=float)
    for row in P:
        plc_params(row)
        row[4:] = tuple(make_state(row[4], row[5]))
    out = np.repeat(P[:, 4:5], len(t), axis=1)
    t_pos = np.unique(t[t > 0])
    if len(t_pos) == 0:
        return out
    atol, rtol = tol
    xs, _, status = plc_paths(P, t_pos, atol, rtol, 1e-4 * t_pos[-1], MAX_STEPS)
    if status != 0:
        raise IntegrationError(f"PLC integration failed (status {status}) for theta={P[0].tolist()}")
    pos = t > 0
    out[:, pos] = xs[:, np.searchsorted(t_pos, t[pos])]
    return out


def _plc_valid(theta) -> bool:
    try:
        plc_params(theta)
        make_state(theta[4], theta[5])
    except (ParameterError, ValueError):
        return False
    return True


# ---------------------------------------------------------------- constraints


def project(family: ModelFamily, theta, allow_negative: bool = False) -> np.ndarray:
    """Map a parameter vector onto the family's validity domain."""
    th = np.array(theta, dtype=float)
    if family is ModelFamily.PLC:
        a, b, g, d, x0, y0 = th
        raw = [a, b - a, g, d - g]
        if allow_negative:
            neg = [i for i, r in enumerate(raw) if r < 0]
            keep = min(neg, key=lambda i: raw[i]) if neg else None
            raw = [r if (i == keep or r >= 0) else 0.0 for i, r in enumerate(raw)]
        else:
            raw = [max(r, 0.0) for r in raw]
        a, g = raw[0], raw[2]
        b, d = a + raw[1], g + raw[3]
        deficit = (a + g) - (b + d)
        if deficit > 0:
            b += 0.5 * deficit
            d += 0.5 * deficit
        x0, y0 = project_to_simplex(x0, y0)
        th[:] = (a, b, g, d, x0, y0)
    elif family is ModelFamily.ALTMANN_K3:
        th[0] = max(th[0], 0.0)
    else:
        th[0] = max(th[0], 1e-12)  # a
        th[2] = max(th[2], 0.0)  # c
    return th


# ---------------------------------------------------------------- priors


def _heuristic_start(family: ModelFamily, data: Dataset) -> np.ndarray:
    t, f = data.t, data.f
    c = float(min(1.0, max(f.max() * 1.05, 1e-3)))
    ff = np.clip(f, 1e-4 * c, c * (1 - 1e-4))
    z = np.log(ff / (c - ff))
    slope, icpt = np.polyfit(t, z, 1) if len(t) > 1 else (0.5, z[0])
    a = float(np.exp(-icpt))
    if family is ModelFamily.PA:
        return np.array([a, slope, c])
    if family is ModelFamily.ALTMANN_K2:
        return np.array([a, slope, c, 0.0])
    if family is ModelFamily.ALTMANN_K3:
        return np.array([c, icpt, slope, 0.0, 0.0])
    return _plc_grid_starts(data, 1)[0]


def _plc_grid_starts(data: Dataset, k: int) -> list[np.ndarray]:
    # screen a small grid around the rate of a logistic fit, keep the lowest rss
    pa = fit(ModelFamily.PA, data, predict_fate=False)
    a, b, c = pa.theta
    rate = float(np.clip(abs(b), 0.05, 5.0))
    if data.t[0] == 0:
        x0 = float(np.clip(data.f[0], 1e-4, 0.9))
    else:
        x0 = float(np.clip(c / (1.0 + a), 1e-4, 0.9))
    cands = []
    for am in (1.0, 2.0):
        al = am * rate
        for db in (0.5, 2.0):
            for gm in (0.5, 1.0, 2.0):
                for dd in (0.5, 2.0):
                    for y0 in (1e-3, 1e-2, 0.05):
                        g = gm * al
                        cands.append([al, al * (1 + db), g, g + dd * al, x0, min(y0, 1 - x0)])
    cands = np.array(cands)
    try:
        X = _plc_batch(cands, data.t)
    except IntegrationError:
        return list(cands[:k])
    rss = np.sum((X - data.f) ** 2, axis=1)
    return [cands[i] for i in np.argsort(rss, kind="stable")[:k]]


def draw_start(family: ModelFamily, data: Dataset, rng: np.random.Generator, allow_negative=False):
    """One random starting point.

    PLC: alpha, beta, gamma, delta log-uniform on [1e-3, 10] (beta >= alpha,
    delta >= gamma by swapping; with ``allow_negative`` one of beta, delta
    may flip sign), x0, y0 uniform on [0, 0.2]^2.  Logistic families:
    a log-uniform on [1e-1, 1e3], rates uniform on [-1, 2] (quadratic and
    cubic terms scaled down), c uniform between max(f) and 1.
    """
    def logu(lo, hi, size=None):
        return np.exp(rng.uniform(np.log(lo), np.log(hi), size))

    fmax = float(data.f.max())
    if family is ModelFamily.PLC:
        a, b, g, d = logu(1e-3, 10.0, 4)
        a, b = min(a, b), max(a, b)
        g, d = min(g, d), max(g, d)
        if allow_negative and rng.uniform() < 0.5:
            if rng.uniform() < 0.5:
                b = -b
            else:
                d = -d
        x0, y0 = rng.uniform(0.0, 0.2, 2)
        return project(family, [a, b, g, d, x0, y0], allow_negative)
    c = rng.uniform(max(fmax, 1e-3), 1.0) if fmax < 1 else 1.0
    a = logu(1e-1, 1e3)
    if family is ModelFamily.PA:
        return np.array([a, rng.uniform(-1, 2), c])
    if family is ModelFamily.ALTMANN_K2:
        return np.array([a, rng.uniform(-1, 2), c, rng.uniform(-0.1, 0.1)])
    return np.array([c, -np.log(a), rng.uniform(-1, 2), rng.uniform(-0.1, 0.1), rng.uniform(-0.01, 0.01)])


# ---------------------------------------------------------------- optimizer


@dataclass
class FitResult:
    family: ModelFamily
    theta: np.ndarray
    sigma: np.ndarray
    rss: float
    rmse: float
    n_iter: int
    converged: bool
    n_points: int
    flagged: tuple[str, ...] = ()
    fixed: tuple[str, ...] = ()
    predicted_outcome: Fate | None = None
    rss_history: list[float] = field(default_factory=list, repr=False)
    start_index: int = 0

    @property
    def params(self) -> dict[str, float]:
        return dict(zip(self.family.names, self.theta.tolist()))

    @property
    def errors(self) -> dict[str, float]:
        return dict(zip(self.family.names, self.sigma.tolist()))

    def predict(self, t):
        return model_eval(self.family, self.theta, t)


class _Problem:
    """Objective over the free parameters.

    With ``internal=True`` the optimizer works in coordinates where the
    PLC validity constraints are plain lower bounds: ``alpha, beta - alpha,
    gamma, delta - gamma`` replace the four rates whenever all four are
    free.  ``step`` maps an increment in those coordinates to theta.
    """

    def __init__(self, family, data, fixed, allow_negative, internal=False):
        self.family = family
        self.data = data
        self.allow_negative = allow_negative
        self.fixed = {k: float(v) for k, v in (fixed or {}).items()}
        unknown = set(self.fixed) - set(family.names)
        if unknown:
            raise ValueError(f"unknown parameter(s) for {family.title}: {sorted(unknown)}")
        self.free = [i for i, n in enumerate(family.names) if n not in self.fixed]
        n = family.n_params
        M = np.eye(n)
        lb = np.full(n, -math.inf)
        if family is ModelFamily.PLC:
            lb[4:] = 0.0
            if internal and all(i in self.free for i in range(4)):
                M[1, 0] = M[3, 2] = 1.0  # moving alpha (gamma) drags beta (delta)
                if not allow_negative:
                    lb[:4] = 0.0
            elif not allow_negative:
                lb[[0, 2]] = 0.0
        elif family is ModelFamily.ALTMANN_K3:
            lb[0] = 0.0
        else:
            lb[[0, 2]] = 0.0
        self.M = M[:, self.free]
        self.lb = lb[self.free]
        self._Minv = np.linalg.pinv(self.M)

    def coords(self, theta):
        return self._Minv @ np.asarray(theta, dtype=float)

    def step(self, theta, d):
        return self.project(theta + self.M @ d)

    def full(self, theta):
        th = np.array(theta, dtype=float)
        for i, n in enumerate(self.family.names):
            if n in self.fixed:
                th[i] = self.fixed[n]
        return th

    def project(self, theta):
        return self.full(project(self.family, self.full(theta), self.allow_negative))

    def residuals(self, theta):
        return model_eval(self.family, theta, self.data.t) - self.data.f

    def safe_rss(self, theta):
        try:
            r = self.residuals(theta)
        except (ParameterError, IntegrationError, ValueError):
            return math.inf, None
        rss = float(r @ r)
        return (rss, r) if math.isfinite(rss) else (math.inf, None)

    def _directions(self, theta):
        # forward step along each coordinate, backward where that is invalid
        phi = self.coords(theta)
        rows, steps = [], []
        for j in range(len(self.free)):
            h = FD_STEP * max(abs(phi[j]), 1e-3)
            th = theta + h * self.M[:, j]
            if not self._valid(th):
                h = -h
                th = theta + h * self.M[:, j]
            rows.append(th)
            steps.append(h)
        return rows, np.array(steps)

    def _valid(self, theta):
        if self.family is ModelFamily.PLC:
            return _plc_valid(theta)
        return True

    def jacobian(self, theta, r0):
        """Forward-difference Jacobian of the residuals in the optimizer's
        coordinates."""
        rows, steps = self._directions(theta)
        if self.family is ModelFamily.PLC:
            # base point and perturbed copies integrated on one step sequence,
            # so the differences carry no step-size switching noise
            X = _plc_batch(np.array([theta] + rows), self.data.t)
            return (X[1:] - X[0]).T / steps
        J = np.zeros((len(r0), len(rows)))
        for col, th in enumerate(rows):
            J[:, col] = (self.residuals(th) - r0) / steps[col]
        return J


def _levenberg_marquardt(prob: _Problem, theta0, max_iter=MAX_ITER):
    theta = prob.project(theta0)
    rss, r = prob.safe_rss(theta)
    if r is None:
        return theta, math.inf, 0, False, []
    history = [rss]
    lam, nu = 1e-3, 2.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if rss <= 1e-30:
            converged = True
            break
        J = prob.jacobian(theta, r)
        g = J.T @ r
        phi = prob.coords(theta)
        # coordinates held on their lower bound by a gradient pointing outward
        free = ~((phi <= prob.lb + 1e-14) & (g > 0))
        if not free.any() or np.max(np.abs(g[free])) < GTOL:
            converged = True
            break
        Jf, gf = J[:, free], g[free]
        A = Jf.T @ Jf
        diag = np.diag(A).copy()
        diag = np.maximum(diag, 1e-12 * max(diag.max(), 1e-300))
        accepted = False
        while lam <= 1e16:
            try:
                sf = np.linalg.solve(A + lam * np.diag(diag), -gf)
            except np.linalg.LinAlgError:
                lam *= nu
                nu *= 2
                continue
            d = np.zeros_like(phi)
            d[free] = sf
            # a single step may close at most 90% of the gap to a bound
            gap = phi - prob.lb
            over = d < -0.9 * gap
            d[over] = -0.9 * gap[over]
            trial = prob.step(theta, d)
            rss_new, r_new = prob.safe_rss(trial)
            if rss_new < rss:
                # gain ratio against the linear model (Nielsen's update)
                d = prob.coords(trial) - phi
                pred = -(2 * d @ g + d @ (J.T @ (J @ d)))
                rho = (rss - rss_new) / pred if pred > 0 else 0.0
                lam = max(lam * max(1 / 3, 1 - (2 * rho - 1) ** 3), 1e-12)
                nu = 2.0
                accepted = True
                break
            lam *= nu
            nu *= 2
        if not accepted:
            # no descent direction left at the noise floor of the model evaluation
            converged = True
            break
        improvement = (rss - rss_new) / rss
        theta, rss, r = trial, rss_new, r_new
        history.append(rss)
        if improvement < RTOL_RSS:
            converged = True
            break
    return theta, rss, it, converged, history


def standard_errors(J, r, n_params: int | None = None, rcond: float = 1e-12):
    """Standard errors ``sqrt(s^2 [(J^T J)^-1]_jj)`` with ``s^2 = rss / (n - p)``.

    When ``J^T J`` is singular to relative precision ``rcond`` the
    pseudo-inverse is used and the indices of parameters with a weight in
    the near-null space are returned as flagged.
    """
    J = np.asarray(J, dtype=float)
    r = np.asarray(r, dtype=float)
    n, p = J.shape
    p = n_params if n_params is not None else p
    if n <= p:
        raise ValueError(f"need more points ({n}) than parameters ({p})")
    s2 = float(r @ r) / (n - p)
    A = J.T @ J
    w, V = np.linalg.eigh(A)
    wmax = max(w.max(), 0.0)
    null = w <= rcond * wmax if wmax > 0 else np.ones_like(w, dtype=bool)
    if np.any(null):
        cov = np.linalg.pinv(A, rcond=rcond, hermitian=True)
        flagged = tuple(int(j) for j in np.nonzero(np.any(np.abs(V[:, null]) > 1e-3, axis=1))[0])
    else:
        cov = np.linalg.inv(A)
        flagged = ()
    sigma = np.sqrt(np.maximum(s2 * np.diag(cov), 0.0))
    return sigma, flagged


def uncertainties(family, theta, data: Dataset, fixed=None):
    """Per-parameter standard errors at ``theta``; fixed parameters get 0.

    Returns ``(sigma, flagged_names)``.
    """
    family = as_family(family)
    prob = _Problem(family, data, fixed, allow_negative=True)
    theta = np.asarray(theta, dtype=float)
    r = prob.residuals(theta)
    J = prob.jacobian(theta, r)
    sig_free, flagged = standard_errors(J, r)
    sigma = np.zeros(family.n_params)
    sigma[prob.free] = sig_free
    return sigma, tuple(family.names[prob.free[j]] for j in flagged)


def fit(
    family,
    data: Dataset,
    init=None,
    multistart: int = 1,
    seed: int = 0,
    fixed: dict | None = None,
    allow_negative: bool = False,
    max_iter: int = MAX_ITER,
    predict_fate: bool = True,
) -> FitResult:
    """Fit ``family`` to ``data`` by Levenberg-Marquardt with multistart.

    With ``init`` the first start is ``init``.  Otherwise PLC opens with
    the ``ceil(multistart / 2)`` best points of a grid built around the
    logistic fit, and the other families with a data-driven heuristic.
    The remaining starts are drawn from the priors of ``draw_start`` with
    ``seed``.  The lowest rss wins, ties going to the lower start index.
    """
    family = as_family(family)
    if multistart < 1:
        raise ValueError("multistart must be at least 1")
    prob = _Problem(family, data, fixed, allow_negative, internal=True)
    if len(data) < len(prob.free) + 1:
        raise ValueError(
            f"{family.title} has {len(prob.free)} free parameters; need at least "
            f"{len(prob.free) + 1} points, got {len(data)}"
        )
    rng = np.random.default_rng(seed)
    if init is not None:
        starts = [np.asarray(init, dtype=float)]
    elif family is ModelFamily.PLC:
        starts = _plc_grid_starts(data, (multistart + 1) // 2)
    else:
        starts = [_heuristic_start(family, data)]
    starts += [draw_start(family, data, rng, allow_negative) for _ in range(multistart - len(starts))]

    best = None
    for k, th0 in enumerate(starts):
        theta, rss, n_iter, conv, hist = _levenberg_marquardt(prob, th0, max_iter)
        logger.debug("start %d: rss=%.6g iter=%d converged=%s", k, rss, n_iter, conv)
        if best is None or rss < best[1]:
            best = (theta, rss, n_iter, conv, hist, k)
    theta, rss, n_iter, conv, hist, k = best
    if not math.isfinite(rss):
        raise IntegrationError(f"{family.title}: no start produced a finite objective")

    r = prob.residuals(theta)
    rss = float(r @ r)
    n = len(data)
    if n > len(prob.free):
        sigma, flagged = uncertainties(family, theta, data, fixed)
    else:
        sigma, flagged = np.zeros(family.n_params), ()
    outcome = None
    if family is ModelFamily.PLC and predict_fate:
        outcome = fate(plc_params(theta), make_state(theta[4], theta[5]))
    return FitResult(
        family=family,
        theta=theta,
        sigma=sigma,
        rss=rss,
        rmse=math.sqrt(rss / n),
        n_iter=n_iter,
        converged=conv,
        n_points=n,
        flagged=flagged,
        fixed=tuple(sorted(prob.fixed)),
        predicted_outcome=outcome,
        rss_history=hist,
        start_index=k,
    )


@dataclass
class HoldoutResult:
    fit: FitResult
    t: np.ndarray
    observed: np.ndarray
    predicted: np.ndarray

    @property
    def residuals(self) -> np.ndarray:
        return self.predicted - self.observed


def predict_holdout(family, data: Dataset, holdout_k: int, **fit_kwargs) -> HoldoutResult:
    """Fit on all but the last ``holdout_k`` points and predict those."""
    family = as_family(family)
    n_free = family.n_params - len(fit_kwargs.get("fixed") or {})
    if not 1 <= holdout_k < len(data) - n_free:
        raise ValueError(
            f"holdout_k must be in [1, {len(data) - n_free - 1}] for {len(data)} points "
            f"and {n_free} free parameters"
        )
    train = data.head(len(data) - holdout_k)
    res = fit(family, train, **fit_kwargs)
    t_out = data.t[-holdout_k:]
    return HoldoutResult(res, t_out, data.f[-holdout_k:], model_eval(family, res.theta, t_out))


@dataclass(frozen=True)
class Outcome:
    label: str  # complete change, reversible change, incomplete change or undecided
    share: float | None  # long-run progressive share for incomplete change
    regime: str
    fate: Fate

    def __str__(self):
        if self.label == INCOMPLETE and self.share is not None:
            return f"{self.label} ({self.share:.4g})"
        return self.label


def long_term_outcome(result: FitResult) -> Outcome:
    if result.family is not ModelFamily.PLC:
        raise ValueError("long-term outcome is only defined for the PLC model")
    p = plc_params(result.theta)
    fa = result.predicted_outcome or fate(p, make_state(result.theta[4], result.theta[5]))
    regime = classify_regime(p).value
    if not fa.converged:
        return Outcome("undecided", None, regime, fa)
    label = fa.label
    share = fa.location.x if label == INCOMPLETE else None
    assert label in (COMPLETE, REVERSIBLE, INCOMPLETE)
    return Outcome(label, share, regime, fa)
