import csv
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conformal_lab import fields as F
from conformal_lab.basis import ModeBasis, ball_volume, sphere_area
from conformal_lab.errors import AliasingError


def _random_mode_field(basis, rng, degree=None, fourier=None):
    return F.random_bandlimited(basis, rng,
                                degree=degree or basis.degree_max // 2,
                                fourier=(fourier or basis.fourier_max // 2)
                                if basis.is_product else 0)


# ----------------------------------------------------------- constructions

def test_constant_field_grid_values(sphere4):
    one = F.constant_field(sphere4.basis, 2.5)
    assert_allclose(one.grid_values, 2.5, rtol=1e-13)


def test_single_degree_one_mode_matches_legendre(s1xs2):
    # the degree-1 zonal harmonic on the 2-sphere factor is
    # sqrt(3 / vol) * cos(chi), constant along the circle
    b = s1xs2.basis
    c = np.zeros((b.circle_mode_count, b.sphere_mode_count))
    c[0, 1] = 1.0
    f = F.synthesize(F.field_from_modes(b, c))
    chi = b.polar_angles()
    want = math.sqrt(3.0 / b.volume) * np.cos(chi)
    assert_allclose(f.grid_values, np.broadcast_to(want, f.grid_values.shape),
                    atol=1e-12)


# -------------------------------------------------------------- transforms

@pytest.mark.parametrize("fixture", ["sphere4", "sphere5", "s1xs2", "s1xs3"])
def test_round_trip(fixture, request, rng):
    m = request.getfixturevalue(fixture)
    f = _random_mode_field(m.basis, rng)
    back = F.analyze(F.synthesize(f))
    assert_allclose(back.coefficients, f.coefficients, atol=1e-10)


def test_analyze_zero_grid(sphere5):
    f = F.field_from_grid(sphere5.basis, np.zeros(sphere5.basis.grid_shape))
    assert_allclose(F.analyze(f).coefficients, 0.0, atol=0.0)


def test_analyze_single_basis_function_orthonormality(s1xs3):
    b = s1xs3.basis
    c = np.zeros((b.circle_mode_count, b.sphere_mode_count))
    c[3, 2] = 1.0
    f = F.synthesize(F.field_from_modes(b, c))
    got = F.analyze(F.field_from_grid(b, f.grid_values)).coefficients.copy()
    assert abs(got[3, 2] - 1.0) < 1e-10
    got[3, 2] = 0.0
    assert np.max(np.abs(got)) < 1e-10


def test_aliasing_error_on_products_of_top_modes():
    b = ModeBasis.for_sphere(4, 12, nodes=13)
    c = np.zeros(13)
    c[12] = 1.0
    f = F.synthesize(F.field_from_modes(b, c))
    with pytest.raises(AliasingError):
        F.analyze(f * f)


# ------------------------------------------------------------- integration

def test_volume_sphere4(sphere4):
    one = F.constant_field(sphere4.basis, 1.0)
    assert_allclose(F.integrate(one), 8.0 * math.pi ** 2 / 3.0, rtol=1e-10)


def test_volume_product(s1xs2):
    one = F.constant_field(s1xs2.basis, 1.0)
    assert_allclose(F.integrate(one), 2.0 * math.pi * 4.0 * math.pi,
                    rtol=1e-10)


def test_nonconstant_mode_integrates_to_zero(sphere5):
    b = sphere5.basis
    c = np.zeros(b.sphere_mode_count)
    c[3] = 1.0
    f = F.synthesize(F.field_from_modes(b, c))
    assert abs(F.integrate(f)) < 1e-12


def test_parseval(sphere5, s1xs2, rng):
    for m in (sphere5, s1xs2):
        f = _random_mode_field(m.basis, rng)
        lhs = F.integrate(f * f)
        rhs = float(np.sum(f.coefficients ** 2))
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


# ---------------------------------------------------------- differentiation

def test_constant_has_zero_derivatives(sphere5):
    one = F.constant_field(sphere5.basis, 3.0)
    assert np.max(F.gradient_norm_squared(one).grid_values) < 1e-24
    h = F.hessian(one)
    assert max(np.max(np.abs(v)) for v in h.components.values()) < 1e-12


def test_sphere_factor_laplacian_eigenvalue(s1xs2):
    b = s1xs2.basis
    c = np.zeros((b.circle_mode_count, b.sphere_mode_count))
    c[0, 3] = 1.0
    f = F.synthesize(F.field_from_modes(b, c))
    lap = F.laplacian(f)
    assert_allclose(lap.grid_values, -12.0 * f.grid_values, rtol=1e-10)


def test_circle_laplacian_eigenvalue():
    ell = 3.0
    b = ModeBasis.for_product("product-S1xS2", 8, 5, length=ell)
    c = np.zeros((b.circle_mode_count, b.sphere_mode_count))
    c[2 * 2 - 1, 0] = 1.0  # cos(2 * 2 pi s / ell)
    f = F.synthesize(F.field_from_modes(b, c))
    lap = F.laplacian(f)
    want = -(2.0 * math.pi * 2.0 / ell) ** 2
    assert_allclose(lap.grid_values, want * f.grid_values, rtol=1e-10)


def test_integration_by_parts(sphere5, s1xs3, rng):
    for m in (sphere5, s1xs3):
        f = _random_mode_field(m.basis, rng)
        g = _random_mode_field(m.basis, rng)
        lhs = F.integrate(F.laplacian(f) * g)
        rhs = F.integrate(f * F.laplacian(g))
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_hessian_trace_is_laplacian(sphere4, s1xs3, rng):
    for m in (sphere4, s1xs3):
        f = _random_mode_field(m.basis, rng)
        assert_allclose(F.hessian(f).trace_values(),
                        F.laplacian(f).grid_values, atol=1e-10)


def test_spectral_derivative_finite_difference_convergence(sphere5, rng):
    """Centered differences approach the spectral derivative at O(h^2)."""
    f = _random_mode_field(sphere5.basis, rng, degree=8)
    errs = []
    for npts in (60, 120, 240):
        theta = np.linspace(0.3, math.pi - 0.3, npts)
        h = theta[1] - theta[0]
        vals = F.evaluate(f, theta)
        fd = (vals[2:] - vals[:-2]) / (2 * h)
        _, grad, _ = F.frame_jets(f, theta[1:-1])
        spectral = grad[0] * sphere5.radius
        errs.append(np.max(np.abs(fd - spectral)))
    assert errs[0] / errs[1] > 3.0
    assert errs[1] / errs[2] > 3.0


def test_differentiate_dispatch(sphere5, rng):
    f = _random_mode_field(sphere5.basis, rng)
    assert isinstance(F.differentiate(f, 1), F.ScalarField)
    assert isinstance(F.differentiate(f, 2), F.SymTensorField)
    with pytest.raises(ValueError):
        F.differentiate(f, 3)


# ------------------------------------------------------------------ dumps

def test_field_csv_dump(tmp_path, s1xs2, rng):
    f = _random_mode_field(s1xs2.basis, rng)
    path = tmp_path / "field.csv"
    F.field_to_csv(f, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["node_index", "coord_1", "coord_2", "value"]
    assert len(rows) - 1 == f.grid_values.size
    assert float(rows[1][3]) == f.grid_values.ravel()[0]


def test_modes_csv_dump(tmp_path, sphere3, rng):
    f = _random_mode_field(sphere3.basis, rng)
    path = tmp_path / "modes.csv"
    F.modes_to_csv(f, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["mode_id", "coefficient"]
    assert len(rows) - 1 == sphere3.basis.mode_count


# -------------------------------------------------------------- invariants

def test_basis_constants():
    assert_allclose(sphere_area(3), 2.0 * math.pi ** 2)
    assert_allclose(ball_volume(5), 8.0 * math.pi ** 2 / 15.0)
    # recursive cross-check: sigma_n = 2 pi sigma_{n-2} / (n - 1)
    for n in range(3, 8):
        assert_allclose(sphere_area(n),
                        2.0 * math.pi * sphere_area(n - 2) / (n - 1),
                        rtol=1e-13)


def test_authoritative_flag(sphere3, rng):
    f = F.random_bandlimited(sphere3.basis, rng, degree=5)
    assert f.authoritative == "both"
    grid_only = F.field_from_grid(sphere3.basis, f.grid_values)
    assert grid_only.authoritative == "grid"
    modes_only = F.field_from_modes(sphere3.basis, f.coefficients)
    assert modes_only.authoritative == "modes"
