"""Analytic catalog fields and their exact differential operators."""

import numpy as np
import pytest
import sympy as sp

from conftest import fd_jacobian
from navslip.errors import OrderTooHigh, UnknownCatalogName
from navslip.fields import (
    AnalyticField,
    X, Y, Z,
    catalog_field,
    channel_robin_mode,
    constant,
    curl,
    divergence,
    gradient_field,
    iterated_curl,
    radial,
    rigid_rotation,
    robin_wavenumber,
    sheared_vortex,
    shear_z,
    solenoidal_poly,
    taylor_green,
)

RNG = np.random.default_rng(42)
PTS = RNG.normal(size=(12, 3))


def test_rigid_rotation_value():
    u = rigid_rotation()
    assert np.allclose(u.value([1.0, 2.0, 3.0]), [-2.0, 1.0, 0.0])


def test_gradient_field_divergence():
    u = gradient_field()
    assert np.allclose(u.value([1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])
    div = divergence(u)
    assert np.allclose(div.value(PTS), 3.0)


def test_jacobian_matches_finite_differences():
    # the stated ground-truth check: exact jacobians against central
    # differences of the value evaluator
    for fld in (
        rigid_rotation(),
        solenoidal_poly(seed=3, degree=3),
        taylor_green(),
        channel_robin_mode(zeta=1.0),
        sheared_vortex(),
    ):
        jac = fld.jacobian(PTS)
        fd = fd_jacobian(fld, PTS, h=1e-5)
        scale = max(np.abs(jac).max(), 1.0)
        assert np.abs(jac - fd).max() / scale < 1e-6, fld.label


def test_solenoidal_fields_have_traceless_jacobian():
    for fld in (
        rigid_rotation(),
        solenoidal_poly(seed=7, degree=3),
        solenoidal_poly(seed=1, degree=4),
        taylor_green(),
        sheared_vortex(),
    ):
        assert fld.solenoidal
        tr = np.trace(fld.jacobian(PTS), axis1=-2, axis2=-1)
        assert np.abs(tr).max() < 1e-12


def test_curl_examples():
    assert np.allclose(curl(rigid_rotation()).value(PTS), [0, 0, 2])
    sz = AnalyticField([sp.sin(Z), 0, 0], label="sinz")
    c = curl(sz)
    got = c.value([[0.0, 0.0, 0.7]])
    assert np.allclose(got, [[0.0, np.cos(0.7), 0.0]], atol=1e-15)


def test_iterated_curl_examples():
    sz = AnalyticField([sp.sin(Z), 0, 0], label="sinz")
    # curl^2 = -Laplacian on this divergence-free mode: back to itself
    twice = iterated_curl(sz, 2)
    assert np.abs(twice.value(PTS) - sz.value(PTS)).max() < 1e-14
    assert iterated_curl(sz, 0) is sz
    once = iterated_curl(rigid_rotation(), 1)
    assert np.allclose(once.value(PTS), [0, 0, 2])
    with pytest.raises(OrderTooHigh):
        iterated_curl(sz, 99)


def test_divergence_of_curl_vanishes():
    for seed in (0, 5):
        u = solenoidal_poly(seed=seed, degree=4)
        dc = divergence(curl(u))
        assert np.abs(dc.value(PTS)).max() < 1e-12


def test_curl_of_gradient_vanishes():
    h = gradient_field((X**2 * Y + sp.sin(Z) * X) / 2)
    cg = curl(h)
    assert np.abs(cg.value(PTS)).max() < 1e-13


def test_gradient_of_rigid_rotation_antisymmetric():
    jac = rigid_rotation().jacobian(PTS)
    expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    assert np.abs(jac - expected).max() < 1e-15


def test_robin_wavenumber_even_root():
    for zeta in (0.5, 1.0, 2.0):
        lam = robin_wavenumber(zeta)
        assert abs(lam * np.tan(lam) - 1.0 / zeta) < 1e-10
    assert abs(robin_wavenumber(1.0) - 0.8603335890) < 1e-9


def test_robin_wavenumber_odd_root():
    mu = robin_wavenumber(1.0, parity="odd")
    assert abs(mu * np.cos(mu) + np.sin(mu)) < 1e-12


def test_channel_robin_mode_profile():
    mode = channel_robin_mode(zeta=1.0)
    lam = mode.wavenumber
    pts = np.column_stack([np.zeros(9), np.zeros(9), np.linspace(-1, 1, 9)])
    vals = mode.value(pts)
    assert np.allclose(vals[:, 0], np.cos(lam * pts[:, 2]), atol=1e-14)
    assert np.abs(vals[:, 1:]).max() == 0.0


def test_solenoidal_poly_deterministic():
    a = solenoidal_poly(seed=9, degree=3)
    b = solenoidal_poly(seed=9, degree=3)
    assert a.exprs == b.exprs
    c = solenoidal_poly(seed=10, degree=3)
    assert a.exprs != c.exprs


def test_solenoidal_poly_tangent_variant(unit_sphere, ellipsoid211):
    for srf in (unit_sphere, ellipsoid211):
        u = solenoidal_poly(seed=4, degree=3, tangent_to=srf)
        pts, _ = srf.quadrature_nodes(16, 32)
        n_unnorm = srf.grad_phi(pts)
        dots = np.einsum("pi,pi->p", u.value(pts), n_unnorm)
        assert np.abs(dots).max() < 1e-12
        tr = np.trace(u.jacobian(pts), axis1=-2, axis2=-1)
        assert np.abs(tr).max() < 1e-12


def test_catalog_dispatch_and_unknown():
    fld = catalog_field("rigid_rotation")
    assert fld.label.startswith("rigid_rotation")
    with pytest.raises(UnknownCatalogName):
        catalog_field("vortex_sheet")


def test_small_named_fields():
    assert np.allclose(radial().value([1.0, 2.0, 3.0]), [1, 2, 3])
    assert np.allclose(shear_z().value([0.0, 0.0, 0.4]), [0.4, 0, 0])
    assert np.allclose(constant(0, 0, 2).value(PTS), [0, 0, 2])


def test_hessian_shape_and_value():
    u = AnalyticField([X**2 * Y, 0, 0], label="quad")
    h = u.hessian(np.array([[1.0, 2.0, 3.0]]))
    assert h.shape == (1, 3, 3, 3)
    assert abs(h[0, 0, 0, 0] - 4.0) < 1e-15  # d^2 u1 / dx^2 = 2 y
    assert abs(h[0, 0, 0, 1] - 2.0) < 1e-15  # d^2 u1 / dx dy = 2 x
