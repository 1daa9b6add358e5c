import functools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from yamabe_lab import functional as fn
from yamabe_lab import geometry as geo
from yamabe_lab import solver as sv

OPTS = sv.SolverOptions(mesh_nodes=257)


@functools.lru_cache(maxsize=None)
def hemi(lam: float) -> sv.YamabeEstimate:
    return sv.minimize_energy(geo.hemisphere(3), lam, 1.0 - lam, OPTS)


def test_sphere_estimate(frozen):
    est = sv.minimize_energy(geo.round_sphere(3), 1.0, 0.0, sv.SolverOptions(mesh_nodes=513))
    assert est.converged
    assert est.value == pytest.approx(frozen["sphere_yamabe"]["3"], rel=1e-3)
    assert est.value >= frozen["sphere_yamabe"]["3"] * (1 - 1e-9)
    assert est.euler_lagrange_residual < OPTS.tolerance


def test_sphere_n4_closed_form(frozen):
    assert sv.closed_form_sphere(4) == pytest.approx(61.56, abs=5e-3)
    assert sv.closed_form_sphere(4) == pytest.approx(frozen["sphere_yamabe"]["4"], rel=1e-12)
    est = sv.minimize_energy(geo.round_sphere(4), 1.0, 0.0, OPTS)
    assert est.value == pytest.approx(frozen["sphere_yamabe"]["4"], rel=1e-2)


@pytest.mark.parametrize("lam", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_hemisphere_matches_ball_family_oracle(frozen, lam):
    est = hemi(lam)
    assert est.converged
    assert est.value == pytest.approx(frozen["ball_family_n3"][str(lam)], rel=1e-3)


@pytest.mark.parametrize("lam", [0.0, 0.5, 1.0])
def test_cap_family_minimum_matches_mpmath(frozen, lam):
    for n in (3, 4):
        key = f"ball_family_n{n}"
        if str(lam) in frozen[key]:
            assert sv.cap_family_minimum(n, lam)[0] == pytest.approx(frozen[key][str(lam)], rel=1e-8)


def test_conformal_representatives_agree():
    # the flat ball and the hemisphere are conformal
    for lam in (0.0, 1.0):
        b = sv.minimize_energy(geo.ball(3), lam, 1.0 - lam, OPTS)
        assert b.value == pytest.approx(hemi(lam).value, rel=5e-3)


def test_closed_form_hemisphere_values():
    v = sv.closed_form_hemisphere(3, 0.0)
    assert v.published == pytest.approx(2.088, abs=1e-3)
    assert v.factor == 8.0
    assert v.rescaled == pytest.approx(8.0 * v.published)
    one = sv.closed_form_hemisphere(3, 1.0)
    assert one.published == pytest.approx(0.75 * math.pi ** (4 / 3), rel=1e-12)
    with pytest.raises(ValueError):
        sv.closed_form_hemisphere(3, 1.5)


def test_cylinder_below_constant_field(frozen):
    L = 10.0
    est = sv.minimize_energy(geo.schoen_product(3, L), 1.0, 0.0, OPTS)
    assert est.value <= frozen["product_constant_energy_n3"]["10"] * (1 + 1e-10)
    assert est.value <= 2.0 * (4 * math.pi * L) ** (2 / 3) * (1 + 1e-10)
    assert est.value < frozen["sphere_yamabe"]["3"]


def test_refinement_is_non_increasing():
    est = sv.refine_and_extrapolate(geo.cylinder(3, 10.0), 1.0, 0.0, sv.SolverOptions(mesh_nodes=65))
    vals = est.level_values
    assert len(vals) == 3
    assert all(b <= a * (1 + 1e-9) for a, b in zip(vals, vals[1:]))
    assert est.extrapolated_value is not None


def test_unreachable_constraint_raises():
    with pytest.raises(ValueError):
        sv.minimize_energy(geo.round_sphere(3), 0.0, 1.0, OPTS)


def test_constant_field_energy_matches_closed_form(frozen):
    for L in (2, 5, 10):
        got = sv.constant_field_energy(geo.schoen_product(3, float(L)), 1.0, 0.0)
        assert got == pytest.approx(frozen["product_constant_energy_n3"][str(L)], rel=1e-10)


def test_sweep_records_failures_instead_of_raising():
    pts = sv.lambda_sweep(geo.round_sphere(3), [0.0, 1.0], sv.SolverOptions(mesh_nodes=65))
    assert isinstance(pts[0][1], Exception)
    assert isinstance(pts[1][1], sv.YamabeEstimate)


def test_minimizer_is_positive_and_normalized():
    est = hemi(0.5)
    u = est.minimizer
    assert np.all(u.values > 0)
    assert fn.constraint(u.model, u, 0.5, 0.5) == pytest.approx(1.0, rel=1e-10)


@given(
    lam=st.sampled_from([0.0, 0.5, 1.0]),
    coeffs=st.lists(st.floats(-0.5, 0.5), min_size=4, max_size=4),
)
def test_estimate_bounds_random_test_functions(lam, coeffs):
    est = hemi(lam)
    m = est.minimizer.model
    t = est.minimizer.t
    w = 1.0 + sum(c * np.cos((k + 1) * t) for k, c in enumerate(coeffs))
    u = fn.normalize(m, fn.DiscretizedField(est.minimizer.mesh, np.maximum(w, 0.01)), lam, 1.0 - lam)
    assert fn.energy(m, u).total >= est.value * (1 - 1e-10)
