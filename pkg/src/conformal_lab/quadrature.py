"""Panel quadrature for integrands with a known pole structure.

Green's functions and their powers behave like r^(2-n) (or log r) at the
pole, which is integrable against the volume measure but defeats the
spectral quadrature of the basis.  The integrators here evaluate the
integrand as a callable at arbitrary points: composite Gauss panels away
from the pole, geometrically graded panels toward it, and on products a
smooth partition of unity that splits the reduced (s, chi) rectangle
into a polar patch around the pole plus a blended far region.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "extrapolate_to_zero",
    "gauss_panels",
    "graded_edges",
    "product_singular_integral",
    "sphere_zonal_integral",
]


def _gauss_rule(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def gauss_panels(edges: np.ndarray, order: int):
    """Composite Gauss-Legendre nodes/weights over consecutive edges."""
    edges = np.asarray(edges, dtype=float)
    x, w = _gauss_rule(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def graded_edges(outer: float, depth: int, ratio: float = 0.5) -> np.ndarray:
    """Edges [0, outer*ratio^depth, ..., outer] grading toward zero."""
    e = [0.0] + [outer * ratio ** j for j in range(depth, -1, -1)]
    return np.asarray(e)


def smoothstep(x: np.ndarray) -> np.ndarray:
    """C^4 ramp from 0 to 1 on [0, 1]."""
    x = np.clip(x, 0.0, 1.0)
    return x ** 5 * (126.0 + x * (-420.0 + x * (540.0 + x * (-315.0 + 70.0 * x))))


def sphere_zonal_integral(m, fn, pole=None, level: int = 1,
                          graded_depth: int | None = None,
                          order: int = 10) -> float:
    """Integral over a sphere backend of a zonal integrand fn(theta).

    ``fn`` receives polar angles and may be singular at the pole axis
    point; panels grade geometrically toward it.  ``level`` doubles the
    panel count per unit.
    """
    n = m.n
    a = m.radius
    if graded_depth is None:
        graded_depth = 24 + 8 * level
    npan = 8 * 2 ** level
    xi0 = math.pi / 8
    edges = np.concatenate([
        graded_edges(xi0, graded_depth)[:-1],
        np.linspace(xi0, math.pi, npan + 1),
    ])
    xi, w = gauss_panels(edges, order)
    theta = xi if (pole is None or pole.axis > 0) else math.pi - xi
    vals = np.asarray(fn(theta), dtype=float)
    surf = m.basis.orbit_area * a ** n * np.sin(xi) ** (n - 1)
    return float(np.sum(vals * surf * w))


def product_singular_integral(m, fn, pole, level: int = 1,
                              order: int = 6,
                              graded_depth: int | None = None) -> float:
    """Integral over a product backend of fn(s, chi) singular at the pole.

    A polar patch of radius r1 around the pole is integrated in
    (r, psi) shells graded toward r = 0; the complement is integrated
    on the full (s, chi) rectangle after multiplying by a C^4 cutoff
    that vanishes inside the patch, so both pieces see a smooth
    integrand.
    """
    d = m.sphere_dim
    b = m.radius
    ell = m.length
    if graded_depth is None:
        graded_depth = 18 + 6 * level
    r1 = 0.25 * min(0.5 * ell, b * math.pi)
    r0 = 0.5 * r1
    orbit = m.basis.orbit_area * b ** (d - 1)

    def to_chart(ds, chi_eff):
        s = pole.s0 + ds
        chi = chi_eff if pole.axis > 0 else math.pi - chi_eff
        return s, chi

    # polar patch: ds = r cos(psi), b*chi = r sin(psi)
    redges = np.concatenate([graded_edges(r0, graded_depth)[:-1],
                             np.linspace(r0, r1, 4 * 2 ** level + 1)])
    r_nodes, r_w = gauss_panels(redges, order)
    p_nodes, p_w = gauss_panels(np.linspace(0.0, math.pi, 8 * 2 ** level + 1),
                                order)
    R, PSI = np.meshgrid(r_nodes, p_nodes, indexing="ij")
    WR, WP = np.meshgrid(r_w, p_w, indexing="ij")
    ds = R * np.cos(PSI)
    chi_eff = R * np.sin(PSI) / b
    s, chi = to_chart(ds, chi_eff)
    cut = 1.0 - smoothstep((R - r0) / (r1 - r0))
    vals = np.asarray(fn(s, chi), dtype=float)
    # ds d(b chi) = r dr dpsi, so the jacobian is plain r
    meas = orbit * np.sin(chi_eff) ** (d - 1) * R
    near = float(np.sum(vals * cut * meas * WR * WP))

    # far region on the full rectangle, integrand cut off inside the patch
    ns = 8 * 2 ** level
    nx = 8 * 2 ** level
    s_nodes, s_w = gauss_panels(np.linspace(-0.5 * ell, 0.5 * ell, ns + 1),
                                order)
    x_nodes, x_w = gauss_panels(np.linspace(0.0, math.pi, nx + 1), order)
    DS, CHI_EFF = np.meshgrid(s_nodes, x_nodes, indexing="ij")
    WS, WX = np.meshgrid(s_w, x_w, indexing="ij")
    rr = np.hypot(DS, b * CHI_EFF)
    cut_far = smoothstep((rr - r0) / (r1 - r0))
    s, chi = to_chart(DS, CHI_EFF)
    vals = np.asarray(fn(s, chi), dtype=float)
    meas = orbit * b * np.sin(CHI_EFF) ** (d - 1)
    far = float(np.sum(vals * cut_far * meas * WS * WX))
    return near + far


def extrapolate_to_zero(radii, values, degree: int = 2) -> float:
    """Limit at r = 0 of samples values(r) = a + b r + ..., smallest radii first."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    order = np.argsort(radii)
    radii, values = radii[order], values[order]
    k = min(len(radii), degree + 2)
    coef = np.polynomial.polynomial.polyfit(radii[:k], values[:k], degree)
    return float(coef[0])
