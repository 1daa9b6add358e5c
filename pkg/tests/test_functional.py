import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from yamabe_lab import functional as fn
from yamabe_lab import geometry as geo


def test_exponents():
    assert fn.exponents(3) == (6.0, 4.0)
    assert fn.exponents(4) == (4.0, 3.0)
    assert fn.gradient_coefficient(3) == 8.0
    assert fn.gradient_coefficient(4) == 6.0


def test_normalized_constant_on_sphere_hits_closed_form(frozen):
    for n in (3, 4, 5):
        m = geo.round_sphere(n)
        u = fn.normalize(m, fn.field_from_function(m, 129, lambda t: 1.0), 1.0, 0.0)
        assert fn.constraint(m, u, 1.0, 0.0) == pytest.approx(1.0, rel=1e-12)
        assert fn.energy(m, u).total == pytest.approx(frozen["sphere_yamabe"][str(n)], rel=1e-9)


def test_constant_on_cylinder():
    L = 10.0
    m = geo.schoen_product(3, L)
    u = fn.normalize(m, fn.field_from_function(m, 65, lambda t: 1.0), 1.0, 0.0)
    c = float(u.values[0])
    assert 4 * math.pi * L * c**6 == pytest.approx(1.0, rel=1e-12)
    e = fn.energy(m, u)
    assert e.gradient_term == pytest.approx(0.0, abs=1e-12)
    assert e.total == pytest.approx(2.0 * 4 * math.pi * L * c**2, rel=1e-12)


def test_boundary_terms_on_flat_ball():
    m = geo.ball(3)
    u = fn.normalize(m, fn.field_from_function(m, 65, lambda t: 1.0), 0.0, 1.0)
    e = fn.energy(m, u)
    # H = 1 on the unit sphere: E = 2 (n-1) * 4 pi c^2 with 4 pi c^4 = 1
    assert e.boundary_term == pytest.approx(4.0 * math.sqrt(4 * math.pi), rel=1e-12)
    assert e.curvature_term == pytest.approx(0.0, abs=1e-12)


def test_gradient_term_is_exact_for_linear_fields():
    m = geo.cylinder(3, 2.0)
    area = 4 * math.pi
    for nodes in (17, 33, 65):
        u = fn.field_from_function(m, nodes, lambda t: 1.0 + t)
        assert fn.energy(m, u).gradient_term == pytest.approx(8.0 * area * 2.0, rel=1e-12)


def test_mesh_accepts_per_segment_counts():
    m = geo.capsule(3, 5.0)
    mesh = fn.discretize(m, (17, 33, 17))
    assert mesh.segment_counts == (17, 33, 17)
    assert mesh.size == 17 + 33 + 17 - 2
    with pytest.raises(ValueError):
        fn.discretize(m, (17, 33))


def test_field_validation():
    mesh = fn.discretize(geo.hemisphere(3), 17)
    with pytest.raises(ValueError):
        fn.DiscretizedField(mesh, -np.ones(mesh.size))
    with pytest.raises(ValueError):
        fn.DiscretizedField(mesh, np.ones(mesh.size + 1))
    u = fn.DiscretizedField(mesh, np.ones(mesh.size))
    with pytest.raises(ValueError):
        u.values[0] = 2.0


def test_weights_validation():
    m = geo.round_sphere(3)
    u = fn.field_from_function(m, 17, lambda t: 1.0)
    with pytest.raises(ValueError):
        fn.normalize(m, u, 0.0, 1.0)
    with pytest.raises(ValueError):
        fn.constraint(m, u, 0.0, 0.0)
    with pytest.raises(ValueError):
        fn.constraint(m, u, -1.0, 1.0)


def test_stiffness_kernel_is_constants():
    mesh = fn.discretize(geo.schoen_product(3, 4.0), 33)
    K = mesh.stiffness.toarray()
    np.testing.assert_allclose(K, K.T, atol=1e-12)
    np.testing.assert_allclose(K @ np.ones(mesh.size), 0.0, atol=1e-10)
    assert np.linalg.eigvalsh(K).min() > -1e-10


def test_holder_bounds_validate_lambda():
    m = geo.hemisphere(3)
    with pytest.raises(ValueError):
        fn.holder_mass_bound(m, 0.0)
    with pytest.raises(ValueError):
        fn.boundary_holder_bound(m, 1.0)
    with pytest.raises(ValueError):
        fn.boundary_holder_bound(geo.round_sphere(3), 0.5)


positive_fields = arrays(np.float64, 33, elements=st.floats(0.05, 10.0))


@given(values=positive_fields, lam=st.floats(0.0, 1.0))
def test_normalize_reaches_the_constraint(values, lam):
    m = geo.hemisphere(3)
    u = fn.DiscretizedField(fn.discretize(m, 33), values)
    v = fn.normalize(m, u, lam, 1.0 - lam)
    assert fn.constraint(m, v, lam, 1.0 - lam) == pytest.approx(1.0, rel=1e-10)


@given(values=positive_fields, c=st.floats(0.1, 10.0))
def test_energy_and_masses_are_homogeneous(values, c):
    m = geo.hemisphere(3)
    u = fn.DiscretizedField(fn.discretize(m, 33), values)
    e, ec = fn.energy(m, u), fn.energy(m, u.scaled(c))
    assert ec.total == pytest.approx(c**2 * e.total, rel=1e-10)
    assert ec.interior_mass == pytest.approx(c**6 * e.interior_mass, rel=1e-10)
    assert ec.boundary_mass == pytest.approx(c**4 * e.boundary_mass, rel=1e-10)


@given(values=positive_fields, lam=st.floats(0.05, 0.95))
def test_holder_bounds_hold_for_normalized_fields(values, lam):
    m = geo.hemisphere(3)
    u = fn.normalize(m, fn.DiscretizedField(fn.discretize(m, 33), values), lam, 1.0 - lam)
    assert fn.l2_mass(u) <= fn.holder_mass_bound(m, lam) * (1 + 1e-9)
    assert fn.boundary_l2_mass(u) <= fn.boundary_holder_bound(m, lam) * (1 + 1e-9)


@given(values=positive_fields)
def test_energy_is_nonnegative_on_positive_curvature(values):
    m = geo.round_sphere(3)
    u = fn.DiscretizedField(fn.discretize(m, 33), values)
    e = fn.energy(m, u)
    assert e.gradient_term >= -1e-12 * e.curvature_term and e.curvature_term > 0
    assert e.total == pytest.approx(e.gradient_term + e.curvature_term + e.boundary_term)


@given(I=st.floats(1e-6, 1e6), B=st.floats(1e-6, 1e6), a=st.floats(0.0, 1.0))
def test_scale_to_constraint_solves_the_mixed_equation(I, B, a):
    b = 1.0 - a
    c = fn.scale_to_constraint(3, a, b, I, B)
    assert a * c**6 * I + b * c**4 * B == pytest.approx(1.0, rel=1e-10)


def test_scale_to_constraint_with_negligible_interior_weight():
    # the interior term is ~1e-38 of the boundary term; the bracket must still hold the root
    m = geo.hemisphere(3)
    u = fn.field_from_function(m, 33, lambda t: 2.0)
    lam = 1.1754943508222875e-38
    v = fn.normalize(m, u, lam, 1.0 - lam)
    assert fn.constraint(m, v, lam, 1.0 - lam) == pytest.approx(1.0, rel=1e-10)
