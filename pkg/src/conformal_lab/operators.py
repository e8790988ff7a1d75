"""The conformal Laplacian, the Paneitz operator, and their quadratic form.

On the catalog backends both operators diagonalize over the mode basis
because the curvature is parallel: the Ricci contraction term splits
through the sphere-factor Laplacian on products and reduces to a
multiple of the full Laplacian on round spheres.  ``build_symbol``
tabulates the per-mode eigenvalues; ``apply_*`` default to the symbol
route and expose an independent pointwise route (spectral derivatives,
frame contraction with the Ricci grid values) used for cross-checks.

With Lam = eigenvalue of -Laplace per mode and lam_sph its sphere-factor
part, the tables are

    L = (4(n-1)/(n-2)) Lam + R
    P = Lam^2 - (4/(n-2)) rc lam_sph_term + c2 R Lam + ((n-4)/2) Q

where the middle term is (n-1)/a^2 * Lam on spheres, (d-1)/b^2 * lam_sph
on products, and c2 = (n^2-4n+8)/(2(n-1)(n-2)).  In dimension four the
zero-order term is dropped (its coefficient vanishes with n-4, so the
branch is explicit but the value agrees).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import fields as F
from .errors import UnsupportedBackendError
from .fields import ScalarField
from .geometry import ConformalFactor, ManifoldModel, conformal_ricci, \
    conformal_scalar_curvature, conformal_q_from_curvature

__all__ = [
    "SpectralSymbol",
    "apply_L",
    "apply_P",
    "apply_P_pointwise",
    "build_symbol",
    "conformal_quadratic_form_E",
    "laplacian_coefficient",
    "quadratic_form_E",
    "symbol_to_csv",
]


def laplacian_coefficient(n: int) -> float:
    """Coefficient of -Laplace in the conformal Laplacian."""
    return 4.0 * (n - 1) / (n - 2)


def _gradient_coefficient(n: int) -> float:
    return (n * n - 4 * n + 8) / (2.0 * (n - 1) * (n - 2))


@dataclass(frozen=True)
class SpectralSymbol:
    """Per-mode eigenvalue table of a diagonalizable operator."""

    manifold: ManifoldModel
    operator: str              # "L" | "P"
    table: np.ndarray          # shaped like the mode table
    metric_tag: str = "base"

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def apply(self, f: ScalarField) -> ScalarField:
        if f.coefficients is None:
            f = F.analyze(f)
        return F.synthesize(
            F.field_from_modes(f.basis, self.table * f.coefficients))

    def multiplicities(self) -> np.ndarray:
        return self.manifold.basis.multiplicities()

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.table)))


def _symbol_table(m: ManifoldModel, operator: str) -> np.ndarray:
    b = m.basis
    lam = b.neg_laplacian_eigenvalues()
    n = m.n
    if operator == "L":
        return laplacian_coefficient(n) * lam + m.scalar_curvature
    if operator != "P":
        raise ValueError(f"unknown operator tag {operator!r}")
    if m.is_product:
        rc_term = ((m.sphere_dim - 1) / m.radius ** 2) \
            * b.sphere_part_eigenvalues()
    else:
        rc_term = ((n - 1) / m.radius ** 2) * lam
    table = (lam ** 2 - (4.0 / (n - 2)) * rc_term
             + _gradient_coefficient(n) * m.scalar_curvature * lam)
    if n != 4:
        table = table + 0.5 * (n - 4) * m.q_value
    return table


def build_symbol(m: ManifoldModel, operator: str) -> SpectralSymbol:
    """Eigenvalue table of L or P on a catalog backend."""
    if m.kind not in ("sphere", "product-S1xS2", "product-S1xS3"):
        raise UnsupportedBackendError(f"no symbol for backend {m.kind!r}")
    return SpectralSymbol(m, operator, _symbol_table(m, operator))


def apply_L(m: ManifoldModel, f: ScalarField) -> ScalarField:
    """-(4(n-1)/(n-2)) Lap f + R f."""
    return build_symbol(m, "L").apply(f)


def apply_P(m: ManifoldModel, f: ScalarField) -> ScalarField:
    """Fourth-order operator, applied mode-wise."""
    return build_symbol(m, "P").apply(f)


def apply_P_pointwise(m: ManifoldModel, f: ScalarField) -> ScalarField:
    """Fourth-order operator through grid-side curvature contraction.

    The Ricci term is the frame contraction of the Hessian with the
    Ricci grid values (the divergence collapses because Ricci is
    parallel on every backend), so this route shares no code with the
    symbol table and serves as its cross-check.
    """
    if f.coefficients is None:
        f = F.analyze(f)
    n = m.n
    lap = F.laplacian(f)
    bilap = F.laplacian(lap)
    hess = F.hessian(f)
    rc = m.ricci_tensor()
    rc_dot_hess = np.sum(
        [rc.components[k] * hess.components[k]
         * (2.0 if k == "sx" else 1.0)
         * (hess.orbit_multiplicity if k == "orb" else 1.0)
         for k in hess.components], axis=0)
    vals = (bilap.grid_values + (4.0 / (n - 2)) * rc_dot_hess
            - _gradient_coefficient(n) * m.scalar_curvature * lap.grid_values)
    if n != 4:
        vals = vals + 0.5 * (n - 4) * m.q_value * f.grid_values
    return F.field_from_grid(m.basis, vals)


def quadratic_form_E(m: ManifoldModel, u: ScalarField, v: ScalarField) -> float:
    """Second-derivative form of the operator pairing.

    E(u, v) = int ( Lap u Lap v - (4/(n-2)) Ric(grad u, grad v)
              + c2 R grad u . grad v + ((n-4)/2) Q u v ) dmu,
    which equals int (P u) v dmu after integration by parts on a closed
    manifold.
    """
    if u.coefficients is None:
        u = F.analyze(u)
    if v.coefficients is None:
        v = F.analyze(v)
    n = m.n
    lap_u = F.laplacian(u).grid_values
    lap_v = F.laplacian(v).grid_values
    gu = F.gradient_components(u)
    gv = F.gradient_components(v)
    rc = m.ricci_tensor()
    rc_grad = rc.bilinear(gu, gv)
    grad_dot = sum(a * b for a, b in zip(gu, gv))
    vals = (lap_u * lap_v - (4.0 / (n - 2)) * rc_grad
            + _gradient_coefficient(n) * m.scalar_curvature * grad_dot)
    if n != 4:
        vals = vals + 0.5 * (n - 4) * m.q_value \
            * u.grid_values * v.grid_values
    return float(np.sum(vals * m.basis.quadrature_weights()))


def conformal_quadratic_form_E(m: ManifoldModel, factor: ConformalFactor,
                               u: ScalarField, v: ScalarField,
                               q_tilde: np.ndarray | None = None) -> float:
    """The quadratic form of the changed metric e^{2w} g, assembled directly.

    Every ingredient (changed Laplacian, Ricci, scalar and Q curvature,
    volume element) is produced from the base curvature and derivatives
    of w, not from the covariance law, so comparing this value with
    int P(rho u) rho v dmu is a genuine two-route test.
    """
    if u.coefficients is None:
        u = F.analyze(u)
    if v.coefficients is None:
        v = F.analyze(v)
    n = m.n
    w = factor.w_grid
    w_vals = w.grid_values
    gw = F.gradient_components(w)
    e2w = np.exp(2.0 * w_vals)

    def lap_tilde(f):
        lap = F.laplacian(f).grid_values
        gf = F.gradient_components(f)
        cross = sum(a * b for a, b in zip(gw, gf))
        return (lap + (n - 2) * cross) / e2w

    gu = F.gradient_components(u)
    gv = F.gradient_components(v)
    rc = conformal_ricci(m, factor)
    rc_grad = rc.bilinear(gu, gv) / e2w ** 2
    grad_dot = sum(a * b for a, b in zip(gu, gv)) / e2w
    vals = (lap_tilde(u) * lap_tilde(v) - (4.0 / (n - 2)) * rc_grad
            + _gradient_coefficient(n)
            * conformal_scalar_curvature(m, factor) * grad_dot)
    if n != 4:
        if q_tilde is None:
            q_tilde = conformal_q_from_curvature(m, factor).grid_values
        vals = vals + 0.5 * (n - 4) * q_tilde * u.grid_values * v.grid_values
    weights = m.basis.quadrature_weights() * np.exp(n * w_vals)
    return float(np.sum(vals * weights))


def symbol_to_csv(symbols, path):
    """Dump one or two symbols: mode_id, factor_indices, eigenvalue columns."""
    if isinstance(symbols, SpectralSymbol):
        symbols = [symbols]
    basis = symbols[0].manifold.basis
    ids = basis.mode_ids()
    cols = {s.operator: s.table.ravel() for s in symbols}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["mode_id", "factor_indices"]
        for tag in ("L", "P"):
            if tag in cols:
                header.append(f"eigenvalue_{tag}")
        writer.writerow(header)
        if basis.is_product:
            indices = [f"{basis.circle_wavenumber(j)}|{mm}"
                       for j in range(basis.circle_mode_count)
                       for mm in range(basis.sphere_mode_count)]
        else:
            indices = [str(l) for l in range(basis.sphere_mode_count)]
        for i, (mid, fidx) in enumerate(zip(ids, indices)):
            row = [mid, fidx]
            for tag in ("L", "P"):
                if tag in cols:
                    row.append(repr(float(cols[tag][i])))
            writer.writerow(row)
