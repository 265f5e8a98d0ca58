import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plcmodel.core import ModelParams, ParameterError, Regime, State, vector_field
from plcmodel.critical import (
    COMPLETE,
    FISH_TRAP,
    INCOMPLETE,
    REVERSIBLE,
    Sector,
    Stability,
    critical_points,
    eig2x2,
    interior_point,
    jacobian,
    nullclines,
    outcome_taxonomy,
    sector_of,
    surviving_sectors,
)
from plcmodel.integrate import fate

WURDE = ModelParams(0.6142, 2.6240, 2.1509, 4.2129)

pos = st.floats(min_value=1e-2, max_value=10.0)


@st.composite
def generic_params(draw):
    a, g = draw(pos), draw(pos)
    return ModelParams(a, a + draw(pos), g, g + draw(pos))


interior = st.tuples(st.floats(0.01, 0.98), st.floats(0.01, 1.0)).map(lambda t: (t[0], t[1] * (0.99 - t[0])))


def test_interior_point_symmetric():
    cs = critical_points(ModelParams(1, 2, 1, 2))
    c = cs.by_kind("C").location
    assert (c.x, c.y) == pytest.approx((1 / 3, 1 / 3), abs=1e-14)
    assert [cp.kind for cp in cs.points] == ["C0", "Cx", "Cy", "C"]


def test_interior_point_wurde_fit():
    cx, cy = interior_point(WURDE)
    assert cx == pytest.approx(0.4441, abs=1e-3)
    assert cy == pytest.approx(0.1301, abs=1e-3)


def test_wurde_cx_eigenvalues():
    cp = critical_points(WURDE).by_kind("Cx")
    lams = sorted(v.real for v in cp.eigenvalues)
    assert lams == pytest.approx([-2.0620, -0.6142], abs=1e-4)
    assert cp.stability is Stability.SINK


def test_jacobian_at_corners():
    p = ModelParams(0.3, 1.1, 0.7, 2.9)
    assert jacobian(p, (0, 0)) == ((0.3, 0.0), (0.0, 0.7))
    assert np.array(jacobian(p, (1, 0))) == pytest.approx(np.array([[-0.3, -1.1], [0.0, 0.7 - 2.9]]))


@settings(max_examples=60)
@given(generic_params(), interior)
def test_jacobian_matches_central_differences(p, s):
    h = 1e-6
    x, y = s
    J = jacobian(p, s)
    fxp, fyp = vector_field(p, (x + h, y))
    fxm, fym = vector_field(p, (x - h, y))
    gxp, gyp = vector_field(p, (x, y + h))
    gxm, gym = vector_field(p, (x, y - h))
    fd = (((fxp - fxm) / (2 * h), (gxp - gxm) / (2 * h)), ((fyp - fym) / (2 * h), (gyp - gym) / (2 * h)))
    assert np.max(np.abs(np.array(J) - np.array(fd))) < 1e-6


@settings(max_examples=200)
@given(generic_params())
def test_generic_stability_pattern(p):
    cs = critical_points(p)
    kinds = {cp.kind: cp.stability for cp in cs.points}
    assert kinds == {
        "C0": Stability.SOURCE,
        "Cx": Stability.SINK,
        "Cy": Stability.SINK,
        "C": Stability.SADDLE,
    }
    c = cs.by_kind("C")
    (a, b), (cc, d) = c.jacobian
    assert a * d - b * cc < 0
    assert c.location.x >= 0 and c.location.y >= 0 and c.location.x + c.location.y <= 1


@settings(max_examples=200)
@given(generic_params())
def test_nullclines_intersect_at_c(p):
    nc = nullclines(p)
    A = np.array([[nc.g_x.a, nc.g_x.b], [nc.g_y.a, nc.g_y.b]])
    sol = np.linalg.solve(A, [nc.g_x.c, nc.g_y.c])
    assert sol == pytest.approx(interior_point(p), abs=1e-10)


@settings(max_examples=50)
@given(generic_params(), st.floats(0.01, 0.99))
def test_nullcline_components_vanish(p, u):
    nc = nullclines(p)
    for name, comp in (("g_x", 0), ("g_y", 1)):
        pts = nc.polyline(name, 2)
        (x0, y0), (x1, y1) = pts
        x, y = x0 + u * (x1 - x0), y0 + u * (y1 - y0)
        assert abs(vector_field(p, (x, y))[comp]) < 1e-12


def test_nullcline_slopes():
    nc = nullclines(ModelParams(1, 2, 1, 3))
    assert nc.g_x.slope == pytest.approx(-0.5) and nc.g_x.intercept == pytest.approx(0.5)
    assert nc.g_y.slope == pytest.approx(-3.0) and nc.g_y.intercept == pytest.approx(1.0)
    assert nullclines(ModelParams(1, 2, 0, 3)).g_y.degenerate


def test_eig2x2_cases():
    vals, vecs = eig2x2(((2.0, 0.0), (0.0, -1.0)))
    assert vals == (2, -1)
    assert [tuple(abs(c) for c in v) for v in vecs] == [(1.0, 0.0), (0.0, 1.0)]
    vals, vecs = eig2x2(((0.0, -1.0), (1.0, 0.0)))
    assert vals[0] == complex(0, 1) and vecs is None
    m = ((0.3, -1.2), (-0.4, -0.9))
    vals, vecs = eig2x2(m)
    w = np.linalg.eigvals(np.array(m))
    assert sorted(v.real for v in vals) == pytest.approx(sorted(w.real))
    for lam, v in zip(vals, vecs):
        assert np.array(m) @ np.array(v) == pytest.approx(lam.real * np.array(v))


def test_case8_edge_is_critical_and_degenerate():
    p = ModelParams(1, 1, 1, 1)
    cs = critical_points(p)
    assert [s.kind for s in cs.segments] == ["edge"]
    mid = cs.segments[0].point(0.5)
    assert (mid.x, mid.y) == pytest.approx((0.5, 0.5))
    from plcmodel.critical import critical_point_at

    assert critical_point_at(p, mid, "SegmentPoint").stability is Stability.DEGENERATE


def test_case3_segment_on_x_axis():
    cs = critical_points(ModelParams(0, 2, 1, 2))
    assert [s.kind for s in cs.segments] == ["x-axis"]
    assert "C" not in [cp.kind for cp in cs.points]


def test_all_zero_rates_everything_critical():
    assert critical_points(ModelParams(0, 0, 0, 0)).everywhere


# ---------------------------------------------------------------- sectors


def test_sector_examples():
    p = ModelParams(1, 2, 1, 2)
    assert sector_of(p, (1 / 3, 1 / 3)) is Sector.AT_C
    assert sector_of(p, (0.9, 0.05)) is Sector.ON_GX
    # (0.05, 0.9) lies on g_y: 1 - 2 * 0.05 = 0.9
    assert sector_of(p, (0.05, 0.9)) is Sector.ON_GY
    assert sector_of(p, (0.1, 0.85)) is Sector.I
    assert sector_of(p, (0.1, 0.1)) is Sector.III
    assert sector_of(p, (0.1, 0.6)) is Sector.II
    assert sector_of(p, (0.6, 0.1)) is Sector.IV


def test_sector_rejects_non_generic():
    with pytest.raises(ParameterError):
        sector_of(ModelParams(0, 2, 1, 2), (0.1, 0.1))


def test_fish_trap_members():
    assert FISH_TRAP == {Sector.II, Sector.IV, Sector.ON_GX, Sector.ON_GY}


@settings(max_examples=200)
@given(generic_params(), interior)
def test_sector_matches_field_signs(p, s):
    sec = sector_of(p, s)
    fx, fy = vector_field(p, s)
    if sec is Sector.I:
        assert fx < 0 and fy < 0
    elif sec is Sector.III:
        assert fx > 0 and fy > 0
    elif sec is Sector.II:
        assert fx < 0 and fy > 0
    elif sec is Sector.IV:
        assert fx > 0 and fy < 0


def test_surviving_sectors_generic():
    assert surviving_sectors(ModelParams(1, 2, 1, 2)) == ("I", "II", "III", "IV")


# ---------------------------------------------------------------- taxonomy


def _attracted_by(report, s, tol=1e-5):
    for obj in report.attractors:
        if obj.location is not None:
            if math.hypot(s.x - obj.location.x, s.y - obj.location.y) < tol:
                return obj
        else:
            u, dist = obj.segment.project(s.x, s.y)
            lo, hi = obj.interval
            if dist < tol and lo - 1e-6 <= u <= hi + 1e-6:
                return obj
    return None


def test_generic_taxonomy():
    rep = outcome_taxonomy(ModelParams(1, 2, 1, 2))
    roles = {o.kind: (o.role, o.label) for o in rep.objects}
    assert roles["Cx"] == ("attractor", COMPLETE)
    assert roles["Cy"] == ("attractor", REVERSIBLE)
    assert roles["C"][0] == "saddle"
    assert roles["C0"][0] == "repeller"
    assert rep.labels() == {COMPLETE, REVERSIBLE}


def test_case3_taxonomy_split_at_c():
    p = ModelParams(0, 2, 1, 2)  # C would sit at (0.5, 0) on the critical x-axis
    rep = outcome_taxonomy(p)
    assert rep.regime is Regime.CASE3
    segs = [o for o in rep.objects if o.kind == "segment"]
    att = [o for o in segs if o.role == "attractor"]
    rep_ = [o for o in segs if o.role == "repeller"]
    assert len(att) == 1 and len(rep_) == 1
    assert att[0].interval == pytest.approx((0.5, 1.0))
    assert att[0].label == INCOMPLETE
    assert {o.kind for o in rep.attractors} == {"Cy", "segment"}


def test_case7_taxonomy():
    # alpha = 0 and gamma = delta: x' = -beta x y <= 0, y' = gamma y (1 - x - y) >= 0
    rep = outcome_taxonomy(ModelParams(0, 2, 1, 1))
    assert rep.regime is Regime.CASE7
    assert rep.labels() == {REVERSIBLE}


def test_case6_taxonomy():
    # alpha = beta: x' = alpha x (1 - x - y) >= 0, and y decays along the edge
    rep = outcome_taxonomy(ModelParams(1, 1, 1, 2))
    assert rep.regime is Regime.CASE6
    assert rep.labels() == {COMPLETE}


def test_case8_taxonomy():
    rep = outcome_taxonomy(ModelParams(1, 1, 1, 1))
    assert [(o.kind, o.role) for o in rep.attractors] == [("segment", "attractor")]
    assert rep.attractors[0].segment.kind == "edge"


def test_one_negative_reports_sectors():
    rep = outcome_taxonomy(ModelParams(0.1076, 2.3732, 0.0377, -1.1806))
    assert rep.regime is Regime.ONE_NEGATIVE
    assert rep.sectors
    assert set(rep.sectors) <= {"I", "II", "III", "IV"}


# off the diagonal: with alpha = gamma = 0 the diagonal creeps into C0 like 1/t
SEEDS = [(0.2, 0.25), (0.6, 0.1), (0.1, 0.6), (0.45, 0.4), (0.05, 0.08), (0.8, 0.05)]


@pytest.mark.parametrize(
    "params",
    [(0, 2, 1, 2), (1, 2, 0, 2), (0, 2, 0, 2), (1, 1, 1, 2), (1, 2, 1, 1), (1, 1, 1, 1), (0, 2, 1, 1), (1, 1, 0, 2)],
)
def test_singular_taxonomy_agrees_with_simulation(params):
    p = ModelParams(*params)
    rep = outcome_taxonomy(p)
    for s0 in SEEDS:
        fa = fate(p, State(*s0))
        assert fa.converged, (params, s0, fa)
        assert _attracted_by(rep, fa.location, tol=1e-4) is not None, (params, s0, fa)
