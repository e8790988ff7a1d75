"""Zonal spectral bases and quadrature on the manifold catalog.

The catalog holds round spheres S^n (n = 3..7) and the products
S^1(l) x S^2(b), S^1(l) x S^3(b).  Every field in the laboratory is
rotationally invariant about a fixed axis of the sphere (factor), so a
scalar field reduces to a function of the polar angle alone, and on a
product to a function of (circle arclength, polar angle).  The basis
functions are the zonal harmonics about that axis, orthonormalized with
respect to the manifold volume measure, paired with a real Fourier basis
on the circle factor.

Quadrature is Gauss-Jacobi in the polar cosine (the Jacobi weight
absorbs the sin^(d-1) surface factor exactly, which plain Gauss-Legendre
only achieves for a 2-sphere factor) and a uniform trapezoid rule on the
circle.  With nq polar nodes the rule integrates zonal polynomials of
degree <= 2*nq - 1 exactly; with N circle nodes it integrates
wavenumbers |k| <= N - 1 exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import eval_jacobi, gammaln, roots_jacobi

from .errors import UnsupportedBackendError

KIND_SPHERE = "sphere"
KIND_S1XS2 = "product-S1xS2"
KIND_S1XS3 = "product-S1xS3"
PRODUCT_KINDS = (KIND_S1XS2, KIND_S1XS3)
ALL_KINDS = (KIND_SPHERE,) + PRODUCT_KINDS


def sphere_area(d: int) -> float:
    """Surface measure of the unit d-sphere."""
    return 2.0 * math.pi ** ((d + 1) / 2.0) / math.gamma((d + 1) / 2.0)


def ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def harmonic_dimension(d: int, m: int) -> int:
    """Dimension of the degree-m spherical harmonic space on S^d."""
    if m == 0:
        return 1
    return math.comb(d + m, d) - math.comb(d + m - 2, d)


def _jacobi_norm_sq(l: int, a: float) -> float:
    # integral over [-1, 1] of (1 - t^2)^a * P_l^{(a,a)}(t)^2
    return math.exp(
        (2 * a + 1) * math.log(2.0)
        - math.log(2 * l + 2 * a + 1)
        + 2 * gammaln(l + a + 1)
        - gammaln(l + 2 * a + 1)
        - gammaln(l + 1)
    )


def zonal_polynomials(sphere_dim: int, degree_max: int, t: np.ndarray):
    """Orthonormal zonal polynomials on S^sphere_dim and t-derivatives.

    Parameters
    ----------
    sphere_dim : int
        Dimension d of the sphere the zonal functions live on.
    degree_max : int
        Highest harmonic degree evaluated.
    t : array
        Polar cosines in [-1, 1].

    Returns
    -------
    (P0, P1, P2) : arrays of shape (t.size, degree_max + 1)
        Values and first/second derivatives with respect to t of the
        polynomials p_l orthonormal under the weight (1 - t^2)^((d-2)/2).
    """
    a = (sphere_dim - 2) / 2.0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    nl = degree_max + 1
    P0 = np.empty((t.size, nl))
    P1 = np.zeros((t.size, nl))
    P2 = np.zeros((t.size, nl))
    for l in range(nl):
        s = 1.0 / math.sqrt(_jacobi_norm_sq(l, a))
        P0[:, l] = s * eval_jacobi(l, a, a, t)
        if l >= 1:
            P1[:, l] = s * 0.5 * (l + 2 * a + 1) * eval_jacobi(l - 1, a + 1, a + 1, t)
        if l >= 2:
            c2 = 0.25 * (l + 2 * a + 1) * (l + 2 * a + 2)
            P2[:, l] = s * c2 * eval_jacobi(l - 2, a + 2, a + 2, t)
    return P0, P1, P2


@dataclass(frozen=True)
class ModeBasis:
    """Discretization of one catalog manifold.

    Fields are stored as coefficients against the orthonormal zonal/Fourier
    modes and as values on the tensor quadrature grid.  ``sphere_dim`` is
    the dimension of the sphere (factor); products add a circle of length
    ``length``.  ``radius`` scales the sphere (factor).
    """

    kind: str
    sphere_dim: int
    degree_max: int
    fourier_max: int
    radius: float
    length: float
    sphere_nodes: int
    circle_nodes: int

    # ---------------------------------------------------------------- setup
    @staticmethod
    def for_sphere(n: int, degree_max: int, radius: float = 1.0,
                   nodes: int | None = None) -> "ModeBasis":
        if nodes is None:
            nodes = max(degree_max + 1, (3 * (degree_max + 1)) // 2)
        if nodes < 1:
            raise UnsupportedBackendError("sphere_nodes must be positive")
        return ModeBasis(KIND_SPHERE, n, degree_max, 0, float(radius), 0.0,
                         int(nodes), 0)

    @staticmethod
    def for_product(kind: str, degree_max: int, fourier_max: int,
                    length: float, radius: float = 1.0,
                    sphere_nodes: int | None = None,
                    circle_nodes: int | None = None) -> "ModeBasis":
        if kind not in PRODUCT_KINDS:
            raise UnsupportedBackendError(f"unknown product kind {kind!r}")
        d = 2 if kind == KIND_S1XS2 else 3
        if sphere_nodes is None:
            sphere_nodes = max(degree_max + 1, (3 * (degree_max + 1)) // 2)
        if circle_nodes is None:
            circle_nodes = max(2 * fourier_max + 1, 3 * fourier_max + 2)
        return ModeBasis(kind, d, degree_max, fourier_max, float(radius),
                         float(length), int(sphere_nodes), int(circle_nodes))

    # ------------------------------------------------------------ structure
    @property
    def is_product(self) -> bool:
        return self.kind in PRODUCT_KINDS

    @property
    def n(self) -> int:
        """Dimension of the manifold."""
        return self.sphere_dim + (1 if self.is_product else 0)

    @property
    def orbit_area(self) -> float:
        """Area of the unit orbit sphere of the zonal reduction."""
        return sphere_area(self.sphere_dim - 1)

    @property
    def polar_norm(self) -> float:
        """Measure carried by one unit of the polar weight (1-t^2)^a."""
        if self.is_product:
            return self.orbit_area * self.radius ** self.sphere_dim
        return self.orbit_area * self.radius ** self.n

    @property
    def volume(self) -> float:
        v_sph = sphere_area(self.sphere_dim) * self.radius ** self.sphere_dim
        if self.is_product:
            return self.length * v_sph
        return v_sph

    @property
    def circle_mode_count(self) -> int:
        return 2 * self.fourier_max + 1 if self.is_product else 1

    @property
    def sphere_mode_count(self) -> int:
        return self.degree_max + 1

    @property
    def mode_count(self) -> int:
        return self.circle_mode_count * self.sphere_mode_count

    @property
    def grid_shape(self) -> tuple:
        if self.is_product:
            return (self.circle_nodes, self.sphere_nodes)
        return (self.sphere_nodes,)

    def circle_wavenumber(self, j: int) -> int:
        return (j + 1) // 2

    def mode_ids(self) -> list[str]:
        if not self.is_product:
            return [f"l{l}" for l in range(self.sphere_mode_count)]
        ids = []
        for j in range(self.circle_mode_count):
            k = self.circle_wavenumber(j)
            tag = "c" if (j == 0 or j % 2 == 1) else "s"
            for m in range(self.sphere_mode_count):
                ids.append(f"k{k}{tag}-m{m}")
        return ids

    # ----------------------------------------------------------- quadrature
    @property
    def jacobi_alpha(self) -> float:
        return (self.sphere_dim - 2) / 2.0

    def polar_rule(self):
        """Gauss-Jacobi nodes t (ascending) and weights for the polar factor."""
        return _polar_rule(self)

    def polar_angles(self) -> np.ndarray:
        t, _ = self.polar_rule()
        return np.arccos(t)

    def circle_points(self) -> np.ndarray:
        return np.arange(self.circle_nodes) * (self.length / self.circle_nodes)

    def quadrature_weights(self) -> np.ndarray:
        """Manifold measure weights on the grid (same shape as the grid)."""
        _, w = self.polar_rule()
        w_sph = self.polar_norm * w
        if not self.is_product:
            return w_sph
        w_circ = np.full(self.circle_nodes, self.length / self.circle_nodes)
        return np.outer(w_circ, w_sph)

    @property
    def polar_exactness(self) -> int:
        """Largest zonal polynomial degree integrated exactly."""
        return 2 * self.sphere_nodes - 1

    @property
    def circle_exactness(self) -> int:
        """Largest Fourier wavenumber integrated exactly."""
        return self.circle_nodes - 1 if self.is_product else 0

    # --------------------------------------------------------- value tables
    def polar_tables(self):
        """(P0, P1, P2) for all modes at the polar quadrature nodes."""
        return _polar_tables(self)

    def circle_tables(self):
        """(U0, U1, U2) for all circle modes at the circle nodes."""
        return _circle_tables(self)

    def polar_values(self, t: np.ndarray):
        """(P0, P1, P2) at arbitrary polar cosines t."""
        return zonal_polynomials(self.sphere_dim, self.degree_max, t)

    def circle_values(self, s: np.ndarray):
        """(U0, U1, U2) of the normalized real Fourier modes at points s."""
        return _circle_values(self.fourier_max, self.length, s)

    # ---------------------------------------------------------- eigenvalues
    def sphere_factor_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of -Laplace on the sphere (factor), per degree."""
        m = np.arange(self.sphere_mode_count, dtype=float)
        return m * (m + self.sphere_dim - 1) / self.radius ** 2

    def circle_factor_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of -d^2/ds^2 on the circle, per real mode."""
        if not self.is_product:
            return np.zeros(1)
        j = np.arange(self.circle_mode_count)
        k = (j + 1) // 2
        return (2.0 * math.pi * k / self.length) ** 2

    def neg_laplacian_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of -Laplace per mode, shaped like the mode table."""
        lam_s = self.sphere_factor_eigenvalues()
        if not self.is_product:
            return lam_s
        lam_c = self.circle_factor_eigenvalues()
        return lam_c[:, None] + lam_s[None, :]

    def sphere_part_eigenvalues(self) -> np.ndarray:
        """Sphere-factor part of -Laplace per mode (mode-table shaped)."""
        lam_s = self.sphere_factor_eigenvalues()
        if not self.is_product:
            return lam_s
        return np.broadcast_to(lam_s[None, :],
                               (self.circle_mode_count,
                                self.sphere_mode_count)).copy()

    def multiplicities(self) -> np.ndarray:
        """True eigenspace dimensions carried by each reduced mode."""
        mult_s = np.array(
            [harmonic_dimension(self.sphere_dim, m)
             for m in range(self.sphere_mode_count)], dtype=int)
        if not self.is_product:
            return mult_s
        ones = np.ones(self.circle_mode_count, dtype=int)
        return np.outer(ones, mult_s)


@lru_cache(maxsize=64)
def _polar_rule(basis: ModeBasis):
    t, w = roots_jacobi(basis.sphere_nodes, basis.jacobi_alpha,
                        basis.jacobi_alpha)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@lru_cache(maxsize=64)
def _polar_tables(basis: ModeBasis):
    t, _ = basis.polar_rule()
    norm = math.sqrt(basis.polar_norm)
    tables = zonal_polynomials(basis.sphere_dim, basis.degree_max, t)
    out = tuple(tab / norm for tab in tables)
    for tab in out:
        tab.setflags(write=False)
    return out


def _circle_values(fourier_max: int, length: float, s: np.ndarray):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    nm = 2 * fourier_max + 1
    U0 = np.empty((s.size, nm))
    U1 = np.zeros((s.size, nm))
    U2 = np.zeros((s.size, nm))
    U0[:, 0] = 1.0 / math.sqrt(length)
    amp = math.sqrt(2.0 / length)
    for k in range(1, fourier_max + 1):
        om = 2.0 * math.pi * k / length
        c, sn = np.cos(om * s), np.sin(om * s)
        U0[:, 2 * k - 1] = amp * c
        U0[:, 2 * k] = amp * sn
        U1[:, 2 * k - 1] = -amp * om * sn
        U1[:, 2 * k] = amp * om * c
        U2[:, 2 * k - 1] = -amp * om * om * c
        U2[:, 2 * k] = -amp * om * om * sn
    return U0, U1, U2


@lru_cache(maxsize=64)
def _circle_tables(basis: ModeBasis):
    s = basis.circle_points()
    out = _circle_values(basis.fourier_max, basis.length, s)
    for tab in out:
        tab.setflags(write=False)
    return out
