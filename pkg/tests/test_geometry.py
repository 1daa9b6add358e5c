import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from yamabe_lab import geometry as geo


def _warp_for(expr: str) -> geo.Warp:
    if expr == "sin(t)":
        return geo.Warp("sin", (1.0, 0.0))
    if expr == "1":
        return geo.Warp("constant", (1.0,))
    if expr == "t":
        return geo.Warp("linear", (1.0, 0.0))
    func = {"cosh(t)": np.cosh, "1 + t**2/4": lambda t: 1 + t * t / 4}[expr]
    slope = {"cosh(t)": (math.sinh(0.0), math.sinh(1.5)), "1 + t**2/4": (0.0, 0.75)}[expr]
    ts = np.linspace(0.0, 1.5, 301)
    return geo.Warp("spline", slope, tuple(zip(ts, func(ts))))


def test_scalar_curvature_matches_symbolic_oracle(frozen):
    for row in frozen["curvature"]:
        seg = geo.WarpedSegment(row["n"], _warp_for(row["warp"]), (0.2, 1.2))
        got = seg.scalar_curvature(np.array(row["t"]))
        # splines carry interpolation error in f''; closed forms are exact
        tol = 1e-4 if row["warp"] in ("cosh(t)", "1 + t**2/4") else 1e-12
        np.testing.assert_allclose(got, row["R"], atol=tol, err_msg=row["warp"])


def test_named_model_curvatures():
    assert geo.round_sphere(3).segments[0].scalar_curvature(1.0) == pytest.approx(6.0)
    assert geo.round_sphere(4).segments[0].scalar_curvature(1.0) == pytest.approx(12.0)
    assert geo.cylinder(3, 5.0).segments[0].scalar_curvature(1.0) == pytest.approx(2.0)
    assert geo.schoen_product(4, 5.0).segments[0].scalar_curvature(1.0) == pytest.approx(6.0)
    assert geo.ball(3).segments[0].scalar_curvature(0.5) == pytest.approx(0.0)


def test_curvature_at_smooth_pole_is_finite():
    seg = geo.round_sphere(3).segments[0]
    assert seg.scalar_curvature(0.0) == pytest.approx(6.0)
    assert seg.scalar_curvature(math.pi) == pytest.approx(6.0)


def test_volumes_match_oracle(frozen):
    for n in range(3, 7):
        assert geo.volume(geo.round_sphere(n)) == pytest.approx(frozen["sphere_area"][str(n)], rel=1e-10)
        assert geo.volume(geo.hemisphere(n)) == pytest.approx(frozen["hemisphere_volume"][str(n)], rel=1e-10)
    assert geo.volume(geo.round_sphere(3)) == pytest.approx(2 * math.pi**2, rel=1e-12)
    assert geo.volume(geo.projective_space(3)) == pytest.approx(math.pi**2, rel=1e-12)
    assert geo.volume(geo.schoen_product(3, 7.0)) == pytest.approx(4 * math.pi * 7.0, rel=1e-12)
    assert geo.volume(geo.quotient_product(3, 7.0)) == pytest.approx(2 * math.pi * 7.0, rel=1e-12)


def test_boundary_data():
    hemi = geo.hemisphere(3)
    assert geo.boundary_area(hemi) == pytest.approx(4 * math.pi)
    assert geo.boundary_mean_curvature(hemi, 1) == pytest.approx(0.0, abs=1e-14)
    b = geo.ball(3, 2.0)
    assert geo.boundary_mean_curvature(b, 1) == pytest.approx(0.5)
    cap = geo.sphere_minus_cap(3, 1.0)
    # geodesic sphere of radius 1 seen from inside the ball: H = cot 1
    assert geo.boundary_mean_curvature(cap, 1) == pytest.approx(1.0 / math.tan(1.0), rel=1e-10)
    assert geo.boundary_mean_curvature(geo.sphere_minus_cap(3, 2.0), 1) < 0
    with pytest.raises(geo.GeometryError):
        geo.boundary_mean_curvature(cap, 0)


def test_half_fiber_models_carry_a_lateral_boundary():
    for m in (geo.half_sphere(3), geo.hemi_cylinder(3, 4.0), geo.hemi_capsule(3, 5.0)):
        assert m.lateral_boundary
        assert m.has_boundary
        assert geo.boundary_area(m) > 0
    assert geo.volume(geo.half_sphere(3)) == pytest.approx(0.5 * geo.volume(geo.round_sphere(3)))


@pytest.mark.parametrize("name,params", [("capsule", {"l": 5.0}), ("hemi_capsule", {"l": 5.0})])
def test_glued_models_mark_the_neck(name, params):
    m = geo.build_model(name, 3, **params)
    neck = m.segments[m.neck]
    assert neck.length == pytest.approx(5.0)
    assert neck.warp.kind == "constant"


def test_covering_volumes_scale_by_sheet_count():
    for m, k in [
        (geo.quotient_product(3, 5.0), 2),
        (geo.projective_space(3), 2),
        (geo.schoen_product(3, 5.0), 3),
    ]:
        cover = geo.covering_unwrap(m, k)
        assert geo.volume(cover) == pytest.approx(k * geo.volume(m), rel=1e-12)
    assert geo.covering_unwrap(geo.round_sphere(3), 1) is not None


def test_invalid_inputs_raise():
    with pytest.raises(geo.GeometryError):
        geo.Warp("exp", (1.0,))
    with pytest.raises(geo.GeometryError):
        geo.WarpedSegment(2, geo.Warp("constant", (1.0,)), (0.0, 1.0))
    with pytest.raises(geo.GeometryError):
        geo.WarpedSegment(3, geo.Warp("linear", (-1.0, 0.5)), (0.0, 1.0))
    with pytest.raises(geo.GeometryError):
        geo.build_model("torus", 3)
    with pytest.raises(geo.GeometryError):
        geo.covering_unwrap(geo.round_sphere(3), 2)
    with pytest.raises(ValueError):
        geo.cylinder(3, -1.0)


@given(n=st.integers(3, 6), L=st.floats(0.5, 50.0))
def test_product_volume_property(n, L):
    m = geo.schoen_product(n, L)
    assert geo.volume(m) == pytest.approx(oracles.unit_sphere_area(n - 1) * L, rel=1e-10)
    assert m.is_closed


@given(r=st.floats(0.2, 5.0), t=st.floats(0.01, 0.99))
def test_sin_warp_curvature_scales_like_inverse_square(r, t):
    seg = geo.WarpedSegment(3, geo.Warp("sin", (r, 0.0)), (0.0, math.pi * r))
    assert float(seg.scalar_curvature(t * math.pi * r)) == pytest.approx(6.0 / r**2, rel=1e-9)
