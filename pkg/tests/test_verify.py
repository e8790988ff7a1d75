import json
import math

import numpy as np
import pytest

from conformal_lab import fields as F
from conformal_lab.errors import (HypothesisFailError,
                                  UnsupportedDimensionError)
from conformal_lab.geometry import ConformalFactor, ManifoldModel
from conformal_lab.verify import (SUITES, check_4d_identity, check_covariance,
                                  check_green_compare, check_mass,
                                  check_sign_theorems, check_spectrum_claims,
                                  check_total_q, check_weak_identity,
                                  default_test_functions, hypotheses_for,
                                  run_suite)


# ------------------------------------------------------------ weak identity

def test_weak_identity_sphere5(sphere5):
    report = check_weak_identity(sphere5, level=2)
    assert report.passed
    main = [c for c in report.checks if c.law == "weak-identity"]
    assert len(main) == 6
    assert all(abs(c.residual) < 1e-10 for c in main)


def test_weak_identity_sphere3(sphere3):
    report = check_weak_identity(sphere3, level=2)
    assert report.passed


def test_weak_identity_product_converges(s1xs2):
    worst = []
    for level in (0, 1, 2):
        report = check_weak_identity(s1xs2, level=level)
        assert report.passed
        worst.append(max(abs(c.residual) for c in report.checks
                         if c.law == "weak-identity"))
    assert worst[0] > worst[1] > worst[2]
    assert worst[0] < 1e-2


def test_weak_identity_rejects_dimension4(sphere4):
    with pytest.raises(UnsupportedDimensionError):
        check_weak_identity(sphere4)


class _IndefiniteModel(ManifoldModel):
    """A stand-in whose conformal Laplacian has a negative bottom."""

    @property
    def scalar_curvature(self):
        return -1.0


def test_hypothesis_gate_raises(sphere5):
    bad = _IndefiniteModel(sphere5.kind, sphere5.n, sphere5.radius,
                           sphere5.length, sphere5.basis)
    assert not hypotheses_for(bad)["yamabe_positive"]
    with pytest.raises(HypothesisFailError):
        check_weak_identity(bad)


# ------------------------------------------------------------- 4d identity

def test_4d_identity_sphere(sphere4):
    report = check_4d_identity(sphere4, level=2)
    assert report.passed
    assert all(abs(c.residual) < 1e-8 for c in report.checks)


def test_4d_identity_product(s1xs3):
    report = check_4d_identity(s1xs3, level=1)
    assert report.passed


def test_4d_identity_rejects_other_dimensions(sphere5):
    with pytest.raises(UnsupportedDimensionError):
        check_4d_identity(sphere5)


# ----------------------------------------------------------------- total Q

def test_total_q_round_sphere(sphere4):
    report = check_total_q(sphere4)
    assert report.passed
    assert report.resolution["verdict"] == "EQUALITY"
    assert abs(report.resolution["total_q"] - 16 * math.pi ** 2) < 1e-8
    assert abs(report.resolution["defect"]) < 1e-10


def test_total_q_product_strict(s1xs3):
    report = check_total_q(s1xs3, level=1)
    assert report.passed
    assert report.resolution["verdict"] == "STRICT"
    assert abs(report.resolution["total_q"]) < 1e-10
    target = 16 * math.pi ** 2
    assert abs(report.resolution["defect"] - target) < 0.02 * target


def test_total_q_conformally_perturbed_sphere(sphere4, rng):
    """The total stays 16 pi^2 under random conformal perturbations."""
    target = 16 * math.pi ** 2
    for _ in range(5):
        w = F.random_bandlimited(sphere4.basis, rng, degree=3, amplitude=0.1)
        factor = ConformalFactor.from_w(sphere4, w)
        report = check_total_q(sphere4, factor=factor, tolerance=1e-3)
        assert report.passed
        total = report.resolution["total_q"] + report.resolution["defect"]
        assert abs(total - target) < 1e-3 * target


# -------------------------------------------------------------- covariance

@pytest.mark.parametrize("fixture,laws", [
    ("sphere5", {"bilinear-covariance", "green-transport", "blowup-measure",
                 "difference-transport"}),
    ("sphere3", {"bilinear-covariance", "green-transport", "blowup-measure",
                 "difference-transport"}),
    ("sphere4", {"green-transport", "pointwise-covariance-4d",
                 "q-transform-4d", "defect-measure-4d"}),
])
def test_covariance_laws_pass_on_spheres(fixture, laws, request):
    m = request.getfixturevalue(fixture)
    report = check_covariance(m, trials=10, seed=0)
    assert report.passed
    assert {c.law for c in report.checks} == laws
    for c in report.checks:
        assert abs(c.residual) <= 1e-8, (c.law, c.residual)


def test_covariance_identity_factor_is_exact(sphere5):
    """With the trivial factor both routes coincide to rounding."""
    from conformal_lab.operators import (conformal_quadratic_form_E,
                                         quadratic_form_E)
    rng = np.random.default_rng(0)
    phi = F.random_bandlimited(sphere5.basis, rng, degree=6)
    psi = F.random_bandlimited(sphere5.basis, rng, degree=6)
    lhs = conformal_quadratic_form_E(sphere5, ConformalFactor.identity(sphere5),
                                     phi, psi)
    rhs = quadratic_form_E(sphere5, phi, psi)
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


def test_covariance_on_product(s1xs3, s1xs2):
    for m in (s1xs3, s1xs2):
        report = check_covariance(m, trials=5, seed=0)
        assert report.passed
        assert report.checks


def test_covariance_with_pinned_factor(sphere5, rng):
    w = F.random_bandlimited(sphere5.basis, rng, degree=3, amplitude=0.08)
    factor = ConformalFactor.from_w(sphere5, w)
    report = check_covariance(sphere5, factor=factor, trials=3, seed=1)
    assert report.passed


# ------------------------------------------------------------ sign theorems

def test_sign_theorems_asserted_on_spheres(sphere3, sphere5):
    for m, want in ((sphere5, "POSITIVE"), (sphere3, "NEGATIVE")):
        report = check_sign_theorems(m)
        assert report.passed
        assert all(c.asserted for c in report.checks)
        assert all(f"verdict={want}" in c.detail for c in report.checks)


def test_sign_theorems_exploratory_on_s1xs2(s1xs2):
    """Q < 0 breaks the hypothesis ledger: record only, never assert."""
    report = check_sign_theorems(s1xs2)
    assert report.passed  # exploratory records cannot fail
    assert not any(c.asserted for c in report.checks)
    assert not report.hypotheses["q_nonnegative"]


# ----------------------------------------------------------------- spectrum

def test_spectrum_suite(sphere5, sphere3, s1xs3, s1xs2):
    for m in (sphere5, sphere3):
        report = check_spectrum_claims(m)
        assert report.passed
        laws = {c.law for c in report.checks}
        assert {"extremal-simple", "extremal-sign-definite",
                "modulus-ordering", "kernel-trivial"} <= laws
    r4 = check_spectrum_claims(s1xs3)
    assert r4.passed
    assert any(c.law == "kernel-vs-constants" and c.passed for c in r4.checks)
    r2 = check_spectrum_claims(s1xs2)
    assert r2.passed
    assert any(not c.asserted for c in r2.checks)


# ------------------------------------------------------------ green compare

def test_green_compare_suite(sphere5, sphere3):
    for m in (sphere5, sphere3):
        report = check_green_compare(m)
        assert report.passed
        assert all("equality=True" in c.detail for c in report.checks)


# --------------------------------------------------------------------- mass

def test_mass_suite(sphere5):
    report = check_mass(sphere5)
    assert report.passed
    assert {c.law for c in report.checks} == {
        "mass-expansion-base", "mass-integral-base",
        "mass-expansion-moebius", "mass-integral-moebius"}


# ---------------------------------------------------------------- reporting

def test_report_json_schema(sphere4):
    report = check_total_q(sphere4)
    data = json.loads(report.to_json())
    assert set(data) == {"suite", "backend", "checks", "hypotheses",
                         "resolution", "runtime_s"}
    for c in data["checks"]:
        assert {"eq", "residual", "tol", "pass", "asserted"} <= set(c)
    data = report.to_dict(include_runtime=False)
    assert "runtime_s" not in data


def test_default_test_functions(sphere5, s1xs2):
    for m in (sphere5, s1xs2):
        fns = default_test_functions(m)
        assert len(fns) == 6
        assert float(np.max(np.abs(fns[0].grid_values - 1.0))) < 1e-12


def test_suite_registry_compatibility(sphere4, sphere5):
    assert run_suite("weak-identity", sphere4) is None
    assert run_suite("4d-identity", sphere5) is None
    assert run_suite("mass", sphere4) is None
    assert set(SUITES) == {"weak-identity", "4d-identity", "total-q",
                           "covariance", "signs", "spectrum",
                           "green-compare", "mass"}


def test_weak_identity_determinism(sphere5):
    r1 = check_weak_identity(sphere5, level=1)
    r2 = check_weak_identity(sphere5, level=1)
    assert [c.residual for c in r1.checks] == [c.residual for c in r2.checks]
