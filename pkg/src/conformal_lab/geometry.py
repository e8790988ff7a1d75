"""Manifold catalog, conformal factors, and curvature transformation.

The catalog manifolds carry constant-coefficient curvature in closed
form: the round sphere S^n(a) has Ricci tensor (n-1)/a^2 times the
metric, and the product S^1(l) x S^d(b) has Ricci eigenvalues
(0, (d-1)/b^2, ...).  Conformal changes of metric are represented by
their logarithm w (the metric picks up a factor e^{2w}); all curvature
of the changed metric is produced from the base curvature and the first
two derivatives of w:

    Ric~ = Ric - (n-2)(Hess w - dw (x) dw) - (Lap w + (n-2)|dw|^2) g
    R~   = e^{-2w} (R - 2(n-1) Lap w - (n-1)(n-2) |dw|^2)

with all components measured in a g-orthonormal frame.  The Q curvature
is assembled from (R, Ric, Lap R) by one dimension-uniform polynomial
formula; for a changed metric it is available both through that formula
and through the covariance law of the fourth-order operator, which the
verification suites compare.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import fields as F
from .basis import (KIND_S1XS2, KIND_SPHERE, ModeBasis, PRODUCT_KINDS)
from .errors import (AliasingError, NonpositiveFactorError,
                     UnsupportedBackendError)
from .fields import ScalarField, SymTensorField

__all__ = [
    "ConformalFactor",
    "ConstantLogProfile",
    "FieldLogProfile",
    "ManifoldModel",
    "MoebiusLogProfile",
    "Pole",
    "SPHERE_DIMENSIONS",
    "catalog_build",
    "conformal_q",
    "conformal_q_from_curvature",
    "conformal_ricci",
    "conformal_scalar_curvature",
    "q_curvature",
    "q_from_data",
]

SPHERE_DIMENSIONS = (3, 4, 5, 6, 7)


@dataclass(frozen=True)
class Pole:
    """A distinguished point on the symmetry axis of the zonal reduction.

    ``axis`` picks the north (+1) or south (-1) end of the sphere
    (factor); ``s0`` is the circle position on product backends.
    """

    axis: int = 1
    s0: float = 0.0

    def label(self) -> str:
        side = "N" if self.axis > 0 else "S"
        return f"{side}@s={self.s0:.6g}"


@dataclass(frozen=True)
class ManifoldModel:
    """A catalog manifold with its discretization and curvature package."""

    kind: str
    n: int
    radius: float
    length: float
    basis: ModeBasis

    # ------------------------------------------------------------- geometry
    @property
    def is_product(self) -> bool:
        return self.kind in PRODUCT_KINDS

    @property
    def sphere_dim(self) -> int:
        return self.basis.sphere_dim

    @property
    def volume(self) -> float:
        return self.basis.volume

    @property
    def scalar_curvature(self) -> float:
        if self.is_product:
            d = self.sphere_dim
            return d * (d - 1) / self.radius ** 2
        return self.n * (self.n - 1) / self.radius ** 2

    @property
    def ricci_eigenvalues(self) -> dict:
        """Constant frame components of the Ricci tensor."""
        if self.is_product:
            lam = (self.sphere_dim - 1) / self.radius ** 2
            return {"ss": 0.0, "sx": 0.0, "xx": lam, "orb": lam}
        lam = (self.n - 1) / self.radius ** 2
        return {"rr": lam, "orb": lam}

    @cached_property
    def ricci_norm_squared(self) -> float:
        rc = self.ricci_tensor()
        return float(rc.norm_squared_values().flat[0])

    @cached_property
    def q_value(self) -> float:
        """Constant Q curvature of the backend."""
        n = self.n
        r2 = self.ricci_norm_squared
        rr = self.scalar_curvature ** 2
        return q_from_data(n, 0.0, r2, rr)

    def ricci_tensor(self) -> SymTensorField:
        comps = {k: np.full(self.basis.grid_shape, v)
                 for k, v in self.ricci_eigenvalues.items()}
        return SymTensorField(self.basis, comps)

    def scalar_curvature_field(self) -> ScalarField:
        return F.constant_field(self.basis, self.scalar_curvature)

    def constant(self, value: float) -> ScalarField:
        return F.constant_field(self.basis, value)

    # ------------------------------------------------------------- sampling
    def grid_points(self):
        """Chart coordinates of the quadrature grid, broadcast to its shape."""
        if self.is_product:
            s = self.basis.circle_points()[:, None]
            chi = self.basis.polar_angles()[None, :]
            return np.broadcast_arrays(s, chi)
        return (self.basis.polar_angles(),)

    def pole_coordinates(self, pole: Pole):
        if self.is_product:
            chi = 0.0 if pole.axis > 0 else math.pi
            return (pole.s0, chi)
        return (0.0 if pole.axis > 0 else math.pi,)

    def pole_separation(self, pole: Pole, *points):
        """Pole-adapted coordinates: angle xi on spheres, (ds, chi) on products."""
        if self.is_product:
            s, chi = points
            ds = np.asarray(s, dtype=float) - pole.s0
            ds = (ds + 0.5 * self.length) % self.length - 0.5 * self.length
            chi_eff = np.asarray(chi, dtype=float)
            if pole.axis < 0:
                chi_eff = math.pi - chi_eff
            return ds, chi_eff
        theta = np.asarray(points[0], dtype=float)
        return theta if pole.axis > 0 else math.pi - theta

    def geodesic_from_pole(self, pole: Pole, *points):
        if self.is_product:
            ds, chi = self.pole_separation(pole, *points)
            return np.hypot(ds, self.radius * chi)
        return self.radius * self.pole_separation(pole, *points)

    def grid_spacing(self) -> float:
        """Coarse geodesic spacing of the quadrature grid."""
        if self.is_product:
            return max(self.length / self.basis.circle_nodes,
                       self.radius * math.pi / self.basis.sphere_nodes)
        return self.radius * math.pi / self.basis.sphere_nodes

    def descriptor(self) -> str:
        if self.is_product:
            return (f"{self.kind}:n={self.n}:l={self.length:.6g}"
                    f":b={self.radius:.6g}")
        return f"{self.kind}:n={self.n}:a={self.radius:.6g}"


def catalog_build(kind: str, n: int | None = None, params: dict | None = None,
                  basis: dict | None = None) -> ManifoldModel:
    """Construct a catalog backend from a manifest-style record.

    Supported: ``sphere`` with n in 3..7, ``product-S1xS2`` (n = 3) and
    ``product-S1xS3`` (n = 4).  ``params`` carries the geometric scales,
    ``basis`` the cutoffs and node counts.
    """
    params = dict(params or {})
    basis = dict(basis or {})
    degree_max = int(basis.pop("degree_max", 16))
    if kind == KIND_SPHERE:
        if n is None:
            raise UnsupportedBackendError("sphere requires a dimension n")
        if n not in SPHERE_DIMENSIONS:
            raise UnsupportedBackendError(
                f"sphere dimension n={n} is outside the catalog (3..7)")
        radius = float(params.pop("radius", 1.0))
        if radius <= 0:
            raise UnsupportedBackendError("sphere radius must be positive")
        mb = ModeBasis.for_sphere(n, degree_max, radius,
                                  basis.pop("sphere_nodes", None))
        _reject_unknown(params, basis)
        return ManifoldModel(kind, n, radius, 0.0, mb)
    if kind in PRODUCT_KINDS:
        want_n = 3 if kind == KIND_S1XS2 else 4
        if n is not None and n != want_n:
            raise UnsupportedBackendError(
                f"{kind} has dimension {want_n}, got n={n}")
        length = float(params.pop("length", 2.0 * math.pi))
        radius = float(params.pop("radius", 1.0))
        if length <= 0 or radius <= 0:
            raise UnsupportedBackendError("product scales must be positive")
        fourier_max = int(basis.pop("fourier_max", max(8, degree_max // 2)))
        mb = ModeBasis.for_product(kind, degree_max, fourier_max, length,
                                   radius, basis.pop("sphere_nodes", None),
                                   basis.pop("circle_nodes", None))
        _reject_unknown(params, basis)
        return ManifoldModel(kind, want_n, radius, length, mb)
    raise UnsupportedBackendError(f"unknown backend kind {kind!r}")


def _reject_unknown(params, basis):
    if params:
        raise UnsupportedBackendError(f"unknown params {sorted(params)}")
    if basis:
        raise UnsupportedBackendError(f"unknown basis options {sorted(basis)}")


# ------------------------------------------------------------- log profiles

class FieldLogProfile:
    """Conformal logarithm given as a band-limited scalar field."""

    def __init__(self, manifold: ManifoldModel, w: ScalarField):
        if w.coefficients is None:
            w = F.analyze(w)
        self.manifold = manifold
        self.w = F.synthesize(w)

    @property
    def bandwidth(self):
        return self.w.bandwidth

    def jets(self, points=None):
        if points is None:
            points = self.manifold.grid_points()
        return F.frame_jets(self.w, *points)


class MoebiusLogProfile:
    """Logarithm of the round-to-round dilation factor on a sphere.

    In the stereographic coordinate t = tan(theta/2) the dilation by
    ``lam`` sends t to lam * t; the pulled-back round metric is
    e^{2w} g with e^w = lam (1 + t^2) / (1 + lam^2 t^2).
    """

    def __init__(self, manifold: ManifoldModel, lam: float, axis: int = 1):
        if manifold.is_product:
            raise UnsupportedBackendError("Moebius factors live on spheres")
        if lam <= 0:
            raise NonpositiveFactorError("dilation parameter must be positive")
        self.manifold = manifold
        self.lam = float(lam)
        self.axis = axis

    bandwidth = None

    def _angle(self, theta):
        th = np.asarray(theta, dtype=float)
        return th if self.axis > 0 else math.pi - th

    def mapped_angle(self, theta):
        """Polar angle of the image point under the dilation."""
        xi = self._angle(theta)
        mapped = 2.0 * np.arctan(self.lam * np.tan(0.5 * xi))
        mapped = np.where(np.isclose(xi, math.pi), math.pi, mapped)
        return mapped if self.axis > 0 else math.pi - mapped

    def jets(self, points=None):
        m = self.manifold
        if points is None:
            points = m.grid_points()
        xi = self._angle(points[0])
        t = np.tan(0.5 * xi)
        lam = self.lam
        d = 1.0 + lam ** 2 * t ** 2
        w = math.log(lam) + np.log1p(t ** 2) - np.log(d)
        w_xi = (1.0 - lam ** 2) * t / d
        w_xixi = (1.0 - lam ** 2) * (1.0 - lam ** 2 * t ** 2) * (1.0 + t ** 2) \
            / (2.0 * d ** 2)
        # cot(xi) w_xi written without the axis singularity
        orb_xi = np.cos(xi) * (1.0 + t ** 2) * (1.0 - lam ** 2) / (2.0 * d)
        sgn = 1.0 if self.axis > 0 else -1.0
        a = m.radius
        grad = (sgn * w_xi / a,)
        hess = {"rr": w_xixi / a ** 2, "orb": orb_xi / a ** 2}
        return w, grad, hess


class ConstantLogProfile:
    """w identically constant (pure rescaling)."""

    def __init__(self, manifold: ManifoldModel, value: float):
        self.manifold = manifold
        self.value = float(value)

    bandwidth = (0, 0)

    def jets(self, points=None):
        m = self.manifold
        if points is None:
            points = m.grid_points()
        shape = np.broadcast(*points).shape if len(points) > 1 else \
            np.asarray(points[0], dtype=float).shape
        w = np.full(shape, self.value)
        zeros = np.zeros(shape)
        if m.is_product:
            grad = (zeros, zeros)
            hess = {"ss": zeros, "sx": zeros, "xx": zeros, "orb": zeros}
        else:
            grad = (zeros,)
            hess = {"rr": zeros, "orb": zeros}
        return w, grad, hess


# --------------------------------------------------------- conformal factor

_CONVENTION_EXPONENTS = {"metric": lambda n: 4.0 / (n - 2),
                         "paneitz": lambda n: 4.0 / (n - 4),
                         "squared": lambda n: 2.0}


class ConformalFactor:
    """A positive conformal change of metric, stored via its logarithm.

    The same metric g~ = e^{2w} g is described in three weight
    conventions, rho^{4/(n-2)} (second-order covariance), rho^{4/(n-4)}
    (fourth-order covariance, n != 4), and rho^2; ``rho`` converts w to
    any of them, so the conventions agree by construction.
    """

    def __init__(self, manifold: ManifoldModel, profile):
        self.manifold = manifold
        self.profile = profile

    # -- constructors
    @staticmethod
    def from_w(manifold: ManifoldModel, w: ScalarField) -> "ConformalFactor":
        return ConformalFactor(manifold, FieldLogProfile(manifold, w))

    @staticmethod
    def from_rho(manifold: ManifoldModel, rho: ScalarField,
                 convention: str = "metric") -> "ConformalFactor":
        if convention not in _CONVENTION_EXPONENTS:
            raise ValueError(f"unknown convention {convention!r}")
        if convention == "paneitz" and manifold.n == 4:
            raise NonpositiveFactorError(
                "the 4/(n-4) weight is undefined in dimension 4")
        grid = rho.grid_values if rho.grid_values is not None \
            else F.synthesize(rho).grid_values
        if np.min(grid) <= 0.0:
            raise NonpositiveFactorError(
                f"conformal factor must be positive, min={np.min(grid):.3g}")
        e = _CONVENTION_EXPONENTS[convention](manifold.n)
        w_vals = 0.5 * e * np.log(grid)
        w = F.analyze(F.field_from_grid(manifold.basis, w_vals))
        return ConformalFactor.from_w(manifold, w)

    @staticmethod
    def moebius(manifold: ManifoldModel, lam: float,
                axis: int = 1) -> "ConformalFactor":
        return ConformalFactor(manifold, MoebiusLogProfile(manifold, lam, axis))

    @staticmethod
    def constant(manifold: ManifoldModel, rho: float,
                 convention: str = "metric") -> "ConformalFactor":
        if rho <= 0:
            raise NonpositiveFactorError("constant factor must be positive")
        e = _CONVENTION_EXPONENTS[convention](manifold.n)
        return ConformalFactor(manifold,
                               ConstantLogProfile(manifold, 0.5 * e * math.log(rho)))

    @staticmethod
    def identity(manifold: ManifoldModel) -> "ConformalFactor":
        return ConformalFactor(manifold, ConstantLogProfile(manifold, 0.0))

    # -- views
    @cached_property
    def w_grid(self) -> ScalarField:
        """w sampled on the quadrature grid, with projected coefficients."""
        w, _, _ = self.profile.jets()
        return F.analyze(F.field_from_grid(self.manifold.basis, w))

    def w_at(self, *points):
        w, _, _ = self.profile.jets(points)
        return w

    def rho(self, convention: str = "metric") -> ScalarField:
        e = _CONVENTION_EXPONENTS[convention](self.manifold.n)
        return F.field_from_grid(self.manifold.basis,
                                 np.exp(2.0 * self.w_grid.grid_values / e))

    def rho_at(self, convention: str, *points):
        e = _CONVENTION_EXPONENTS[convention](self.manifold.n)
        return np.exp(2.0 * self.w_at(*points) / e)

    def conformal_volume(self) -> float:
        n = self.manifold.n
        w = self.w_grid.grid_values
        return float(np.sum(np.exp(n * w)
                            * self.manifold.basis.quadrature_weights()))


def _as_profile(factor_or_profile, manifold):
    if isinstance(factor_or_profile, ConformalFactor):
        return factor_or_profile.profile
    if isinstance(factor_or_profile, ScalarField):
        return FieldLogProfile(manifold, factor_or_profile)
    return factor_or_profile


# ----------------------------------------------------- curvature transforms

def conformal_ricci(m: ManifoldModel, factor, points=None):
    """Ricci tensor of e^{2w} g, components in the base orthonormal frame.

    With ``points=None`` the result is a SymTensorField on the grid;
    otherwise a dict of component arrays at the given points.
    """
    prof = _as_profile(factor, m)
    bw = getattr(prof, "bandwidth", None)
    if bw is not None and bw != (0, 0):
        need = 4 * (bw[1] + 2)
        if need > m.basis.polar_exactness:
            raise AliasingError(
                f"conformal curvature of a degree-{bw[1]} factor needs polar "
                f"exactness {need}, quadrature provides "
                f"{m.basis.polar_exactness}")
    w, grad, hess = prof.jets(points)
    n = m.n
    grad2 = sum(g ** 2 for g in grad)
    if m.is_product:
        lap = hess["ss"] + hess["xx"] + (m.sphere_dim - 1) * hess["orb"]
    else:
        lap = hess["rr"] + (n - 1) * hess["orb"]
    trace_term = lap + (n - 2) * grad2
    rc = m.ricci_eigenvalues
    comps = {}
    if m.is_product:
        gs, gx = grad
        outer = {"ss": gs * gs, "sx": gs * gx, "xx": gx * gx, "orb": 0.0}
        gmat = {"ss": 1.0, "sx": 0.0, "xx": 1.0, "orb": 1.0}
    else:
        (gr,) = grad
        outer = {"rr": gr * gr, "orb": 0.0}
        gmat = {"rr": 1.0, "orb": 1.0}
    for key in outer:
        comps[key] = (rc[key] - (n - 2) * (hess[key] - outer[key])
                      - trace_term * gmat[key])
    if points is None:
        return SymTensorField(m.basis, comps)
    return comps


def conformal_scalar_curvature(m: ManifoldModel, factor, points=None):
    """Scalar curvature of e^{2w} g (values array)."""
    prof = _as_profile(factor, m)
    w, grad, hess = prof.jets(points)
    n = m.n
    grad2 = sum(g ** 2 for g in grad)
    if m.is_product:
        lap = hess["ss"] + hess["xx"] + (m.sphere_dim - 1) * hess["orb"]
    else:
        lap = hess["rr"] + (n - 1) * hess["orb"]
    return np.exp(-2.0 * w) * (m.scalar_curvature - 2.0 * (n - 1) * lap
                               - (n - 1) * (n - 2) * grad2)


# ------------------------------------------------------------- Q curvature

def q_from_data(n: int, lap_R, rc_norm_sq, R_sq):
    """Q curvature from (Lap R, |Ric|^2, R^2); one formula for every n."""
    c2 = (n ** 3 - 4 * n ** 2 + 16 * n - 16) / (8.0 * (n - 1) ** 2 * (n - 2) ** 2)
    return (-lap_R / (2.0 * (n - 1)) - 2.0 * rc_norm_sq / (n - 2) ** 2
            + c2 * R_sq)


def q_curvature(m: ManifoldModel) -> ScalarField:
    """Q curvature of the base metric (constant on catalog backends)."""
    return m.constant(m.q_value)


def conformal_q(m: ManifoldModel, factor: ConformalFactor) -> ScalarField:
    """Q curvature of the changed metric through the covariance laws.

    Dimension 4 uses Q~ = e^{-4w} (P w + Q); otherwise Q~ is read off
    from the fourth-order operator acting on the weight
    rho = e^{(n-4) w / 2}.
    """
    from . import operators  # deferred to keep module layering acyclic

    n = m.n
    w = factor.w_grid
    if n == 4:
        pw = operators.apply_P(m, w)
        vals = np.exp(-4.0 * w.grid_values) * (pw.grid_values + m.q_value)
        return F.field_from_grid(m.basis, vals)
    rho = F.analyze(factor.rho("paneitz"))
    p_rho = operators.apply_P(m, rho)
    expo = -(n + 4.0) / (n - 4.0)
    vals = (2.0 / (n - 4.0)) * rho.grid_values ** expo * p_rho.grid_values
    return F.field_from_grid(m.basis, vals)


def conformal_q_from_curvature(m: ManifoldModel,
                               factor: ConformalFactor) -> ScalarField:
    """Q curvature of the changed metric assembled from its curvature.

    Independent of the covariance route: uses the transformed Ricci
    tensor, the transformed scalar curvature, and the changed-metric
    Laplacian of the latter.
    """
    w = factor.w_grid
    w_vals = w.grid_values
    rc = conformal_ricci(m, factor)
    rc_nsq_tilde = np.exp(-4.0 * w_vals) * rc.norm_squared_values()
    R_t = conformal_scalar_curvature(m, factor)
    R_field = F.analyze(F.field_from_grid(m.basis, R_t))
    lap_R = F.laplacian(R_field).grid_values
    gw = F.gradient_components(w)
    gR = F.gradient_components(R_field)
    cross = sum(a * b for a, b in zip(gw, gR))
    lap_tilde_R = np.exp(-2.0 * w_vals) * (lap_R + (m.n - 2) * cross)
    vals = q_from_data(m.n, lap_tilde_R, rc_nsq_tilde, R_t ** 2)
    return F.field_from_grid(m.basis, vals)
