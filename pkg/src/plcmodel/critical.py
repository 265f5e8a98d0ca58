"""Nullclines, critical points, linearization and long-term outcome taxonomy."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .core import (
    TAU_DOM,
    TAU_REG,
    ModelParams,
    ParameterError,
    Regime,
    State,
    classify_regime,
    make_state,
    vector_field,
)

# half-width of the band in which a point counts as lying on a nullcline
TAU_SEC = 1e-9

COMPLETE = "complete change"
REVERSIBLE = "reversible change"
INCOMPLETE = "incomplete change"


class Stability(enum.Enum):
    SOURCE = "source"
    SINK = "sink"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"


class Sector(enum.Enum):
    I = "I"  # above both nullclines: x and y decrease
    II = "II"  # above g_x, below g_y: x decreases, y increases
    III = "III"  # below both nullclines: x and y increase
    IV = "IV"  # below g_x, above g_y: x increases, y decreases
    ON_GX = "on-gx"
    ON_GY = "on-gy"
    AT_C = "at-C"


FISH_TRAP = frozenset({Sector.II, Sector.IV, Sector.ON_GX, Sector.ON_GY})


@dataclass(frozen=True)
class Line:
    """The line ``a*x + b*y = c``; ``slope``/``intercept`` are NaN if vertical."""

    a: float
    b: float
    c: float

    @property
    def degenerate(self) -> bool:
        return abs(self.b) <= TAU_REG

    @property
    def slope(self) -> float:
        return math.nan if self.degenerate else -self.a / self.b

    @property
    def intercept(self) -> float:
        return math.nan if self.degenerate else self.c / self.b

    def signed_distance(self, x: float, y: float) -> float:
        norm = math.hypot(self.a, self.b)
        if norm == 0.0:
            return 0.0
        return (self.c - self.a * x - self.b * y) / norm


@dataclass(frozen=True)
class Nullclines:
    """``g_x``: y = (alpha/beta)(1 - x), where x' = 0 off the y-axis.
    ``g_y``: y = 1 - (delta/gamma) x, where y' = 0 off the x-axis."""

    g_x: Line
    g_y: Line

    def polyline(self, which: str, n: int = 2) -> list[tuple[float, float]]:
        """Endpoints (or ``n`` samples) of the part of a nullcline inside the simplex."""
        seg = _clip_line_to_simplex(getattr(self, which))
        if seg is None:
            return []
        (x0, y0), (x1, y1) = seg
        return [
            (x0 + (x1 - x0) * k / (n - 1), y0 + (y1 - y0) * k / (n - 1))
            for k in range(n)
        ]


def nullclines(p: ModelParams) -> Nullclines:
    return Nullclines(
        g_x=Line(p.alpha, p.beta, p.alpha),
        g_y=Line(p.delta, p.gamma, p.gamma),
    )


def jacobian(p: ModelParams, s) -> tuple[tuple[float, float], tuple[float, float]]:
    x, y = s
    a, b, g, d = p.as_tuple()
    return (
        (a - 2 * a * x - b * y, -b * x),
        (-d * y, g - 2 * g * y - d * x),
    )


def eig2x2(m):
    """Closed-form eigen-decomposition of a real 2x2 matrix.

    Returns ``(eigenvalues, eigenvectors)``; eigenvalues are complex numbers
    ordered by descending real part, eigenvectors are unit tuples, or None
    when the eigenvalues are complex or repeated.
    """
    (a, b), (c, d) = m
    tr = a + d
    det = a * d - b * c
    disc = 0.25 * tr * tr - det
    if disc < 0:
        w = math.sqrt(-disc)
        return (complex(0.5 * tr, w), complex(0.5 * tr, -w)), None
    r = math.sqrt(disc)
    # avoid cancellation in the smaller root
    big = 0.5 * tr + math.copysign(r, tr) if tr != 0 else r
    small = det / big if big != 0 else 0.5 * tr - r
    lams = sorted((big, small), reverse=True)
    if lams[0] == lams[1]:
        return (complex(lams[0]), complex(lams[1])), None

    vecs = []
    for lam in lams:
        # pick the better-conditioned row of (A - lam I) v = 0
        if abs(b) + abs(a - lam) >= abs(c) + abs(d - lam):
            v = (b, lam - a) if (b, lam - a) != (0.0, 0.0) else (1.0, 0.0)
        else:
            v = (lam - d, c)
        n = math.hypot(*v)
        vecs.append((v[0] / n, v[1] / n))
    return (complex(lams[0]), complex(lams[1])), tuple(vecs)


def stability_from_eigenvalues(eigenvalues, tol: float = TAU_REG) -> Stability:
    l1, l2 = eigenvalues
    if abs(l1) < tol or abs(l2) < tol:
        return Stability.DEGENERATE
    r1, r2 = l1.real, l2.real
    if abs(r1) < tol or abs(r2) < tol:
        return Stability.DEGENERATE
    if r1 < 0 and r2 < 0:
        return Stability.SINK
    if r1 > 0 and r2 > 0:
        return Stability.SOURCE
    if l1.imag == 0 and l2.imag == 0:
        return Stability.SADDLE
    return Stability.DEGENERATE


@dataclass(frozen=True)
class CriticalPoint:
    location: State
    kind: str  # C0, Cx, Cy, C or SegmentPoint
    jacobian: tuple
    eigenvalues: tuple
    eigenvectors: tuple | None
    stability: Stability

    @property
    def stable_direction(self):
        """Unit eigenvector of the most negative real eigenvalue, if any."""
        if self.eigenvectors is None:
            return None
        return self.eigenvectors[1] if self.eigenvalues[1].real < 0 else None


def classify_stability(cp: CriticalPoint, tol: float = TAU_REG) -> Stability:
    return stability_from_eigenvalues(cp.eigenvalues, tol)


def critical_point_at(p: ModelParams, s: State, kind: str, tol: float = TAU_REG) -> CriticalPoint:
    jac = jacobian(p, s)
    vals, vecs = eig2x2(jac)
    return CriticalPoint(s, kind, jac, vals, vecs, stability_from_eigenvalues(vals, tol))


@dataclass(frozen=True)
class CriticalSegment:
    """A straight segment of critical points ``start + u*(end - start)``, u in [0, 1].

    On such a segment one eigenvalue of the Jacobian vanishes (the tangent
    direction) and the transverse eigenvalue equals the trace, which is
    affine in ``u``.
    """

    start: State
    end: State
    kind: str  # x-axis, y-axis, edge, g_x, g_y

    def point(self, u: float) -> State:
        return make_state(
            self.start.x + u * (self.end.x - self.start.x),
            self.start.y + u * (self.end.y - self.start.y),
        )

    def sample(self, n: int) -> list[State]:
        return [self.point(k / (n - 1)) for k in range(n)] if n > 1 else [self.point(0.5)]

    def project(self, x: float, y: float) -> tuple[float, float]:
        """Parameter ``u`` and distance of the closest segment point to ``(x, y)``."""
        dx, dy = self.end.x - self.start.x, self.end.y - self.start.y
        L2 = dx * dx + dy * dy
        u = 0.0 if L2 == 0 else ((x - self.start.x) * dx + (y - self.start.y) * dy) / L2
        u = min(1.0, max(0.0, u))
        px, py = self.start.x + u * dx, self.start.y + u * dy
        return u, math.hypot(x - px, y - py)

    def transverse_eigenvalue(self, p: ModelParams, u: float) -> float:
        (a, _), (_, d) = jacobian(p, self.point(u))
        return a + d

    def intervals(self, p: ModelParams, tol: float = TAU_REG):
        """Split [0, 1] into sub-intervals by the sign of the transverse eigenvalue.

        Returns a list of ``(u_lo, u_hi, sign)`` with sign -1 (attracting),
        +1 (repelling) or 0 (neutral throughout).
        """
        t0 = self.transverse_eigenvalue(p, 0.0)
        t1 = self.transverse_eigenvalue(p, 1.0)

        def sgn(v):
            return 0 if abs(v) <= tol else (1 if v > 0 else -1)

        s0, s1 = sgn(t0), sgn(t1)
        if s0 == s1 or s0 == 0 or s1 == 0:
            s = s0 or s1
            return [(0.0, 1.0, s)]
        u_star = t0 / (t0 - t1)
        return [(0.0, u_star, s0), (u_star, 1.0, s1)]


@dataclass(frozen=True)
class CriticalSet:
    points: list[CriticalPoint]
    segments: list[CriticalSegment] = field(default_factory=list)
    everywhere: bool = False

    def by_kind(self, kind: str) -> CriticalPoint:
        for cp in self.points:
            if cp.kind == kind:
                return cp
        raise KeyError(kind)

    def nearest(self, x: float, y: float):
        """Closest critical object: ``(distance, kind, location)``."""
        if self.everywhere:
            return 0.0, "SegmentPoint", make_state(x, y)
        best = (math.inf, None, None)
        for cp in self.points:
            dist = math.hypot(x - cp.location.x, y - cp.location.y)
            if dist < best[0]:
                best = (dist, cp.kind, cp.location)
        for seg in self.segments:
            u, dist = seg.project(x, y)
            # corners keep their own names when a segment ends there
            if dist < best[0] - 1e-15:
                best = (dist, "SegmentPoint", seg.point(u))
        return best


def interior_point(p: ModelParams):
    """C = (gamma(alpha-beta)/D, alpha(gamma-delta)/D), or None when D = 0."""
    D = p.D
    if abs(D) <= TAU_REG:
        return None
    return (p.gamma * (p.alpha - p.beta) / D, p.alpha * (p.gamma - p.delta) / D)


def _clip_line_to_simplex(line: Line):
    """Part of ``a*x + b*y = c`` inside the closed triangle, as two endpoints."""
    a, b, c = line.a, line.b, line.c
    if abs(a) <= TAU_REG and abs(b) <= TAU_REG:
        return None
    pts = []
    # intersections with x = 0, y = 0 and x + y = 1
    if abs(b) > TAU_REG:
        pts.append((0.0, c / b))
    if abs(a) > TAU_REG:
        pts.append((c / a, 0.0))
    if abs(a - b) > TAU_REG:
        x = (c - b) / (a - b)
        pts.append((x, 1.0 - x))
    inside = []
    for x, y in pts:
        if x >= -TAU_DOM and y >= -TAU_DOM and x + y <= 1 + TAU_DOM:
            q = make_state(x, y)
            if all(math.hypot(q.x - r[0], q.y - r[1]) > 1e-12 for r in inside):
                inside.append((q.x, q.y))
    if len(inside) < 2:
        return None
    inside.sort()
    return inside[0], inside[-1]


def critical_points(p: ModelParams, tol: float = TAU_REG) -> CriticalSet:
    """All critical objects of the PC system inside the simplex.

    C0, Cx and Cy are always critical.  The interior point C is included
    when it exists, lies in the simplex and is not already one of the
    corners or on a critical segment.
    """
    a, b, g, d = p.as_tuple()
    corners = [
        critical_point_at(p, State(0.0, 0.0), "C0", tol),
        critical_point_at(p, State(1.0, 0.0), "Cx", tol),
        critical_point_at(p, State(0.0, 1.0), "Cy", tol),
    ]
    if max(abs(a), abs(b), abs(g), abs(d)) <= tol:
        return CriticalSet(corners, [], everywhere=True)

    segments = []
    if abs(a) <= tol:
        segments.append(CriticalSegment(State(0.0, 0.0), State(1.0, 0.0), "x-axis"))
    if abs(g) <= tol:
        segments.append(CriticalSegment(State(0.0, 0.0), State(0.0, 1.0), "y-axis"))
    if abs(a - b) <= tol and abs(g - d) <= tol:
        segments.append(CriticalSegment(State(1.0, 0.0), State(0.0, 1.0), "edge"))
    ncl = nullclines(p)
    # a vanishing x-rate (or y-rate) makes the other nullcline fully critical
    if abs(a) <= tol and abs(b) <= tol:
        seg = _clip_line_to_simplex(ncl.g_y)
        if seg is not None:
            segments.append(CriticalSegment(State(*seg[0]), State(*seg[1]), "g_y"))
    if abs(g) <= tol and abs(d) <= tol:
        seg = _clip_line_to_simplex(ncl.g_x)
        if seg is not None:
            segments.append(CriticalSegment(State(*seg[0]), State(*seg[1]), "g_x"))
    segments = _dedupe(segments)

    points = list(corners)
    c = interior_point(p)
    if c is not None:
        cx, cy = c
        in_simplex = cx >= -TAU_DOM and cy >= -TAU_DOM and cx + cy <= 1 + TAU_DOM
        if in_simplex:
            s = make_state(cx, cy)
            on_corner = any(
                math.hypot(s.x - q.location.x, s.y - q.location.y) <= 1e-12 for q in corners
            )
            on_segment = any(seg.project(s.x, s.y)[1] <= 1e-12 for seg in segments)
            if not on_corner and not on_segment:
                points.append(critical_point_at(p, s, "C", tol))
    return CriticalSet(points, segments)


def _dedupe(segments):
    out = []
    for seg in segments:
        ends = {(round(seg.start.x, 12), round(seg.start.y, 12)), (round(seg.end.x, 12), round(seg.end.y, 12))}
        if all(
            ends != {(round(o.start.x, 12), round(o.start.y, 12)), (round(o.end.x, 12), round(o.end.y, 12))}
            for o in out
        ):
            out.append(seg)
    return out


def _raw_sector(p: ModelParams, x: float, y: float, tol: float) -> Sector:
    ncl = nullclines(p)
    dgx = ncl.g_x.signed_distance(x, y)  # positive below g_x (x' > 0 side)
    dgy = ncl.g_y.signed_distance(x, y)  # positive below g_y (y' > 0 side)
    on_x, on_y = abs(dgx) <= tol, abs(dgy) <= tol
    if on_x and on_y:
        return Sector.AT_C
    if on_x:
        return Sector.ON_GX
    if on_y:
        return Sector.ON_GY
    if dgx < 0:
        return Sector.I if dgy < 0 else Sector.II
    return Sector.IV if dgy < 0 else Sector.III


def sector_of(p: ModelParams, s, tol: float = TAU_SEC) -> Sector:
    """Position of ``s`` relative to the two nullclines (generic regime only).

    A point within ``tol`` (perpendicular distance) of a nullcline is
    reported as lying on it, even if it is also inside a sector.
    """
    regime = classify_regime(p)
    if regime is not Regime.GENERIC:
        raise ParameterError(f"sectors need transversal nullclines; regime is {regime.value}")
    x, y = s
    return _raw_sector(p, x, y, tol)


def surviving_sectors(p: ModelParams, n: int = 60) -> tuple[str, ...]:
    """Sectors that intersect the simplex, found by sampling an ``n``-grid."""
    if abs(p.beta) <= TAU_REG or abs(p.gamma) <= TAU_REG:
        return ()
    seen = set()
    for i in range(n + 1):
        for j in range(n + 1 - i):
            sec = _raw_sector(p, i / n, j / n, 0.0)
            if sec in (Sector.I, Sector.II, Sector.III, Sector.IV):
                seen.add(sec.value)
    order = ["I", "II", "III", "IV"]
    return tuple(s for s in order if s in seen)


@dataclass(frozen=True)
class LimitObject:
    """A critical point or a sub-interval of a critical segment, with its role."""

    kind: str
    role: str  # attractor, repeller, saddle, degenerate
    label: str | None
    location: State | None = None
    segment: CriticalSegment | None = None
    interval: tuple[float, float] | None = None

    def describe(self) -> dict:
        out = {"kind": self.kind, "role": self.role, "label": self.label}
        if self.location is not None:
            out["location"] = [self.location.x, self.location.y]
        if self.segment is not None:
            lo, hi = self.interval
            a, b = self.segment.point(lo), self.segment.point(hi)
            out["segment"] = self.segment.kind
            out["from"] = [a.x, a.y]
            out["to"] = [b.x, b.y]
        return out


@dataclass(frozen=True)
class OutcomeReport:
    regime: Regime
    objects: list[LimitObject]
    sectors: tuple[str, ...] = ()

    @property
    def attractors(self) -> list[LimitObject]:
        return [o for o in self.objects if o.role == "attractor"]

    def labels(self) -> set[str]:
        return {o.label for o in self.attractors if o.label}


_POINT_LABEL = {"C0": REVERSIBLE, "Cx": COMPLETE, "Cy": REVERSIBLE, "C": INCOMPLETE}
_SEGMENT_LABEL = {
    "x-axis": INCOMPLETE,  # share p progressive, liberal remainder
    "y-axis": REVERSIBLE,  # no progressive speakers left
    "edge": INCOMPLETE,  # progressive and conservative only
    "g_x": INCOMPLETE,
    "g_y": INCOMPLETE,
}
_ROLE = {
    Stability.SINK: "attractor",
    Stability.SOURCE: "repeller",
    Stability.SADDLE: "saddle",
    Stability.DEGENERATE: "degenerate",
}


def label_for(kind: str, location: State) -> str:
    """Linguistic outcome of ending at ``location`` (a critical object of ``kind``)."""
    if kind in _POINT_LABEL:
        return _POINT_LABEL[kind]
    if location.x <= TAU_DOM:
        return REVERSIBLE
    if location.x >= 1 - TAU_DOM:
        return COMPLETE
    return INCOMPLETE


def outcome_taxonomy(p: ModelParams) -> OutcomeReport:
    """Attracting and non-attracting limit objects of the regime, with labels.

    Isolated points lying on a critical segment are folded into the
    segment, whose sub-intervals are classified by the transverse
    eigenvalue.
    """
    regime = classify_regime(p)
    cs = critical_points(p)
    objects = []
    if cs.everywhere:
        return OutcomeReport(regime, [LimitObject("everywhere", "degenerate", None)])
    for cp in cs.points:
        if any(seg.project(cp.location.x, cp.location.y)[1] <= 1e-12 for seg in cs.segments):
            continue
        objects.append(
            LimitObject(cp.kind, _ROLE[cp.stability], _POINT_LABEL[cp.kind], location=cp.location)
        )
    for seg in cs.segments:
        for lo, hi, sign in seg.intervals(p):
            role = {-1: "attractor", 1: "repeller", 0: "degenerate"}[sign]
            objects.append(
                LimitObject("segment", role, _SEGMENT_LABEL[seg.kind], segment=seg, interval=(lo, hi))
            )
    sectors = surviving_sectors(p) if regime in (Regime.GENERIC, Regime.ONE_NEGATIVE) else ()
    return OutcomeReport(regime, objects, sectors)


def check_critical(p: ModelParams, s, tol: float = 1e-10) -> bool:
    fx, fy = vector_field(p, s)
    return abs(fx) <= tol and abs(fy) <= tol
