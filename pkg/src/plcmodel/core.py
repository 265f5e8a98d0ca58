"""Domain types, parameter regimes and the planar vector field of the PC system.

The three-compartment model (progressive, liberal, conservative speakers)
reduces to two fractions ``x`` (progressive) and ``y`` (conservative); the
liberal share is ``1 - x - y``.  Time is whatever axis the data uses (row
index by default), so rates carry units of 1/period.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

# absolute tolerance for equality tests on regime boundaries
TAU_REG = 1e-12
# band absorbed when building a State from slightly-off numbers
TAU_DOM = 1e-9


class ParameterError(ValueError):
    """Raised for parameter sets outside the model's validity domain."""


class DomainError(ValueError):
    """Raised for states outside the simplex (beyond the roundoff band)."""


@dataclass(frozen=True)
class RawParams:
    """Per-encounter propensities and population size, before normalization."""

    alpha_t: float
    beta_t: float
    gamma_t: float
    delta_t: float
    N: float

    def __post_init__(self):
        if not self.N > 0:
            raise ParameterError(f"population size must be positive, got N={self.N}")
        vals = (self.alpha_t, self.beta_t, self.gamma_t, self.delta_t)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError("propensities must be finite")
        if sum(v < 0 for v in vals) > 1:
            raise ParameterError(
                "more than one negative propensity is not supported "
                "(the flow may leave the simplex or admit periodic orbits)"
            )

    @property
    def generic(self) -> bool:
        return min(self.alpha_t, self.beta_t, self.gamma_t, self.delta_t) > 0


def _raw_differences(alpha, beta, gamma, delta):
    # normalized counterparts of the raw propensities (up to the factor N)
    return (alpha, beta - alpha, gamma, delta - gamma)


@dataclass(frozen=True)
class ModelParams:
    """Normalized interaction rates of the PC system.

    ``beta - alpha`` and ``delta - gamma`` are proportional to the raw
    propensities of the P-C encounters, so at most one of
    ``alpha, beta - alpha, gamma, delta - gamma`` may be negative.  When one
    is, ``beta + delta >= alpha + gamma`` is required so that the flow on the
    edge ``x + y = 1`` does not leave the simplex.
    """

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.gamma, self.delta)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError("rates must be finite")
        raw = _raw_differences(*vals)
        n_neg = sum(r < -TAU_REG for r in raw)
        if n_neg > 1:
            raise ParameterError(
                "at most one of alpha, beta-alpha, gamma, delta-gamma may be negative"
            )
        if n_neg == 1 and self.beta + self.delta < self.alpha + self.gamma - TAU_REG:
            raise ParameterError(
                "one-negative regime requires beta + delta >= alpha + gamma "
                f"(got {self.beta + self.delta:.6g} < {self.alpha + self.gamma:.6g})"
            )

    @property
    def D(self) -> float:
        return self.alpha * self.gamma - self.beta * self.delta

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    def swapped(self) -> ModelParams:
        """Parameters of the mirrored system under ``(x, y) -> (y, x)``."""
        return ModelParams(self.gamma, self.delta, self.alpha, self.beta)


@dataclass(frozen=True)
class State:
    x: float
    y: float

    def __post_init__(self):
        if not (0.0 <= self.x and 0.0 <= self.y and self.x + self.y <= 1.0):
            raise DomainError(f"({self.x}, {self.y}) is not in the simplex")

    def __iter__(self):
        yield self.x
        yield self.y

    @property
    def liberal(self) -> float:
        return 1.0 - self.x - self.y


def project_to_simplex(x: float, y: float) -> tuple[float, float]:
    """Euclidean projection of a point onto the closed triangle."""
    excess = x + y - 1.0
    if excess > 0.0:
        x -= 0.5 * excess
        y -= 0.5 * excess
    if x < 0.0:
        x, y = 0.0, min(max(y, 0.0), 1.0)
    elif y < 0.0:
        x, y = min(max(x, 0.0), 1.0), 0.0
    return x, y


def make_state(x: float, y: float, tol: float = TAU_DOM) -> State:
    """Build a State, absorbing roundoff up to ``tol`` outside the simplex."""
    if not (math.isfinite(x) and math.isfinite(y)):
        raise DomainError("state components must be finite")
    if x < -tol or y < -tol or x > 1 + tol or y > 1 + tol or x + y > 1 + tol:
        raise DomainError(
            f"({x}, {y}) violates the simplex constraint x >= 0, y >= 0, x + y <= 1"
        )
    return State(*project_to_simplex(x, y))


class Regime(enum.Enum):
    """Which situation the parameters realize, keyed by the locus of the
    interior critical point C."""

    GENERIC = "generic"
    ONE_NEGATIVE = "one-negative"
    CASE3 = "singular-case-3"  # alpha = 0: C on the x-axis, x-axis critical
    CASE4 = "singular-case-4"  # gamma = 0: C on the y-axis, y-axis critical
    CASE5 = "singular-case-5"  # alpha = gamma = 0: C at C0, both axes critical
    CASE6 = "singular-case-6"  # alpha = beta: C at Cy
    CASE7 = "singular-case-7"  # gamma = delta: C at Cx
    CASE8 = "singular-case-8"  # alpha = beta and gamma = delta: edge x+y=1 critical


def normalize(raw: RawParams) -> ModelParams:
    n = raw.N
    return ModelParams(
        alpha=n * raw.alpha_t,
        beta=n * (raw.alpha_t + raw.beta_t),
        gamma=n * raw.gamma_t,
        delta=n * (raw.gamma_t + raw.delta_t),
    )


def vector_field(p: ModelParams, s) -> tuple[float, float]:
    x, y = s
    return (
        p.alpha * x * (1.0 - x) - p.beta * x * y,
        p.gamma * y * (1.0 - y) - p.delta * x * y,
    )


def classify_regime(p: ModelParams, tol: float = TAU_REG) -> Regime:
    """Tag the parameter set with exactly one regime.

    Overlapping equalities are resolved in this order: alpha = gamma = 0
    (case 5), then alpha = beta and gamma = delta (case 8), then alpha = 0
    (cases 7/3), gamma = 0 (cases 6/4), alpha = beta (case 6), gamma = delta
    (case 7).  Anything left with all raw propensities positive is generic.
    """
    a, b, g, d = p.as_tuple()
    if any(r < -tol for r in _raw_differences(a, b, g, d)):
        return Regime.ONE_NEGATIVE

    def eq(u, v):
        return abs(u - v) <= tol

    a0, g0, ab, gd = eq(a, 0.0), eq(g, 0.0), eq(a, b), eq(g, d)
    if a0 and g0:
        return Regime.CASE5
    if ab and gd:
        return Regime.CASE8
    if a0:
        return Regime.CASE7 if gd else Regime.CASE3
    if g0:
        return Regime.CASE6 if ab else Regime.CASE4
    if ab:
        return Regime.CASE6
    if gd:
        return Regime.CASE7
    return Regime.GENERIC
