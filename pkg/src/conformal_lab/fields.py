"""Scalar and symmetric-tensor fields on catalog manifolds.

A ``ScalarField`` keeps a dual representation: coefficients against the
orthonormal zonal/Fourier modes, and values on the quadrature grid.  The
``authoritative`` property records which side is trustworthy; transforms
never mutate a field, they return a new one with both sides populated.

Tensor fields are stored as grid values of their components in the
adapted orthonormal frame of the backend: on a sphere the radial
direction e_theta plus the (n-1)-fold orbit directions; on a product the
circle direction e_s, the polar direction e_chi, and the orbit.  Zonal
symmetry makes every tensor we need diagonal except for the (s, chi)
component on products.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .basis import ModeBasis
from .errors import AliasingError, ZeroFunctionError

__all__ = [
    "ScalarField",
    "SymTensorField",
    "analyze",
    "constant_field",
    "differentiate",
    "evaluate",
    "field_from_function",
    "field_from_grid",
    "field_from_modes",
    "field_to_csv",
    "gradient_norm_squared",
    "gradient_components",
    "hessian",
    "integrate",
    "inner_product",
    "laplacian",
    "modes_to_csv",
    "random_bandlimited",
    "synthesize",
]


def _freeze(arr):
    if arr is None:
        return None
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ScalarField:
    """A scalar field in dual (modes + grid) representation.

    ``bandwidth`` is the effective harmonic degree content
    (circle, sphere); ``None`` means unknown, treated as full-band when
    checking projection exactness.
    """

    basis: ModeBasis
    coefficients: np.ndarray | None = None
    grid_values: np.ndarray | None = None
    bandwidth: tuple | None = None

    def __post_init__(self):
        if self.coefficients is None and self.grid_values is None:
            raise ValueError("a field needs coefficients or grid values")
        object.__setattr__(self, "coefficients", _freeze(self.coefficients))
        object.__setattr__(self, "grid_values", _freeze(self.grid_values))
        if self.coefficients is not None:
            want = ((self.basis.circle_mode_count, self.basis.sphere_mode_count)
                    if self.basis.is_product else (self.basis.sphere_mode_count,))
            if self.coefficients.shape != want:
                raise ValueError(
                    f"coefficient shape {self.coefficients.shape} != {want}")
        if self.grid_values is not None:
            if self.grid_values.shape != self.basis.grid_shape:
                raise ValueError(
                    f"grid shape {self.grid_values.shape} "
                    f"!= {self.basis.grid_shape}")

    @property
    def authoritative(self) -> str:
        if self.coefficients is not None and self.grid_values is not None:
            return "both"
        return "modes" if self.coefficients is not None else "grid"

    # ------------------------------------------------------------- algebra
    def _grid(self):
        if self.grid_values is not None:
            return self.grid_values
        return synthesize(self).grid_values

    def __add__(self, other):
        if isinstance(other, ScalarField):
            bw = _bw_max(self.bandwidth, other.bandwidth)
            return ScalarField(self.basis, None, self._grid() + other._grid(), bw)
        return ScalarField(self.basis, None, self._grid() + other, None
                           if self.bandwidth is None else self.bandwidth)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            bw = _bw_max(self.bandwidth, other.bandwidth)
            return ScalarField(self.basis, None, self._grid() - other._grid(), bw)
        return ScalarField(self.basis, None, self._grid() - other, self.bandwidth)

    def __rsub__(self, other):
        return ScalarField(self.basis, None, other - self._grid(), self.bandwidth)

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            return ScalarField(self.basis, None, self._grid() * other._grid(),
                               _bw_sum(self.bandwidth, other.bandwidth))
        if np.isscalar(other):
            coeffs = None if self.coefficients is None else self.coefficients * other
            grid = None if self.grid_values is None else self.grid_values * other
            return ScalarField(self.basis, coeffs, grid, self.bandwidth)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, p):
        return ScalarField(self.basis, None, self._grid() ** p, None)

    def exp(self):
        return ScalarField(self.basis, None, np.exp(self._grid()), None)

    def log(self):
        return ScalarField(self.basis, None, np.log(self._grid()), None)

    def min(self):
        return float(np.min(self._grid()))

    def max(self):
        return float(np.max(self._grid()))


def _bw_sum(a, b):
    if a is None or b is None:
        return None
    return (a[0] + b[0], a[1] + b[1])


def _bw_max(a, b):
    if a is None or b is None:
        return None
    return (max(a[0], b[0]), max(a[1], b[1]))


# ------------------------------------------------------------ constructors

def field_from_modes(basis: ModeBasis, coefficients) -> ScalarField:
    coefficients = np.asarray(coefficients, dtype=float)
    if not basis.is_product:
        bw = (0, _top_degree(coefficients))
    else:
        nz = np.nonzero(np.any(np.abs(coefficients) > 0, axis=1))[0]
        kmax = basis.circle_wavenumber(int(nz[-1])) if nz.size else 0
        mz = np.nonzero(np.any(np.abs(coefficients) > 0, axis=0))[0]
        bw = (kmax, int(mz[-1]) if mz.size else 0)
    return ScalarField(basis, coefficients, None, bw)


def _top_degree(c):
    nz = np.nonzero(np.abs(c) > 0)[0]
    return int(nz[-1]) if nz.size else 0


def field_from_grid(basis: ModeBasis, values, bandwidth=None) -> ScalarField:
    return ScalarField(basis, None, np.asarray(values, dtype=float), bandwidth)


def constant_field(basis: ModeBasis, value: float) -> ScalarField:
    if basis.is_product:
        c = np.zeros((basis.circle_mode_count, basis.sphere_mode_count))
        c[0, 0] = value * math.sqrt(basis.volume)
    else:
        c = np.zeros(basis.sphere_mode_count)
        c[0] = value * math.sqrt(basis.volume)
    f = field_from_modes(basis, c)
    return synthesize(f)


def field_from_function(basis: ModeBasis, fn, bandwidth=None) -> ScalarField:
    """Sample ``fn`` on the grid.  fn(theta) on spheres, fn(s, chi) on products."""
    if basis.is_product:
        s = basis.circle_points()
        chi = basis.polar_angles()
        vals = fn(s[:, None], chi[None, :])
        vals = np.broadcast_to(vals, basis.grid_shape).astype(float)
    else:
        vals = np.asarray(fn(basis.polar_angles()), dtype=float)
    return field_from_grid(basis, vals, bandwidth)


def random_bandlimited(basis: ModeBasis, rng, degree: int, fourier: int = 0,
                       amplitude: float = 1.0, decay: float = 1.0) -> ScalarField:
    """A reproducible random field supported on low modes.

    Coefficients decay like exp(-decay * degree) and the field is scaled
    so its sup norm is ``amplitude``.
    """
    degree = min(degree, basis.degree_max)
    if basis.is_product:
        fourier = min(fourier, basis.fourier_max)
        c = np.zeros((basis.circle_mode_count, basis.sphere_mode_count))
        for j in range(2 * fourier + 1):
            k = basis.circle_wavenumber(j)
            for m in range(degree + 1):
                c[j, m] = rng.normal() * math.exp(-decay * (k + m))
    else:
        c = np.array([rng.normal() * math.exp(-decay * l) if l <= degree else 0.0
                      for l in range(basis.sphere_mode_count)])
    f = synthesize(field_from_modes(basis, c))
    top = float(np.max(np.abs(f.grid_values)))
    if top == 0.0:
        raise ZeroFunctionError("random draw produced the zero field")
    return f * (amplitude / top)


# --------------------------------------------------------------- transforms

def synthesize(f: ScalarField) -> ScalarField:
    """Populate grid values from coefficients (coefficients unchanged)."""
    if f.coefficients is None:
        raise ValueError("synthesize needs authoritative coefficients")
    if f.grid_values is not None:
        return f
    P0, _, _ = f.basis.polar_tables()
    if f.basis.is_product:
        U0, _, _ = f.basis.circle_tables()
        grid = U0 @ f.coefficients @ P0.T
    else:
        grid = P0 @ f.coefficients
    return ScalarField(f.basis, f.coefficients, grid, f.bandwidth)


def _check_projection_exactness(f: ScalarField):
    b = f.basis
    bw = f.bandwidth
    bw_k = b.fourier_max if bw is None else bw[0]
    bw_m = b.degree_max if bw is None else bw[1]
    if bw_m + b.degree_max > b.polar_exactness:
        raise AliasingError(
            f"projection onto degree {b.degree_max} of a degree-{bw_m} field "
            f"needs polar exactness {bw_m + b.degree_max}, quadrature "
            f"provides {b.polar_exactness}")
    if b.is_product and bw_k + b.fourier_max > b.circle_exactness:
        raise AliasingError(
            f"projection onto wavenumber {b.fourier_max} of a "
            f"wavenumber-{bw_k} field needs circle exactness "
            f"{bw_k + b.fourier_max}, quadrature provides {b.circle_exactness}")


def analyze(f: ScalarField) -> ScalarField:
    """Project grid values onto the mode basis by quadrature."""
    if f.grid_values is None:
        raise ValueError("analyze needs authoritative grid values")
    _check_projection_exactness(f)
    b = f.basis
    P0, _, _ = b.polar_tables()
    _, w_pol = b.polar_rule()
    w_pol = w_pol * b.polar_norm
    if b.is_product:
        U0, _, _ = b.circle_tables()
        w_circ = np.full(b.circle_nodes, b.length / b.circle_nodes)
        coeffs = (U0 * w_circ[:, None]).T @ f.grid_values @ (P0 * w_pol[:, None])
    else:
        coeffs = (P0 * w_pol[:, None]).T @ f.grid_values
    return ScalarField(b, coeffs, f.grid_values, f.bandwidth)


def evaluate(f: ScalarField, *points) -> np.ndarray:
    """Evaluate a mode-represented field at arbitrary points.

    Spheres take ``evaluate(f, theta)``; products take ``evaluate(f, s, chi)``
    with broadcastable arrays (evaluated pointwise, not on a mesh).
    """
    if f.coefficients is None:
        raise ValueError("evaluate needs coefficients; call analyze first")
    b = f.basis
    if b.is_product:
        s, chi = np.broadcast_arrays(np.asarray(points[0], float),
                                     np.asarray(points[1], float))
        shp = s.shape
        U0, _, _ = b.circle_values(s.ravel())
        P0, _, _ = b.polar_values(np.cos(chi.ravel()))
        P0 = P0 / math.sqrt(b.polar_norm)
        vals = np.einsum("xj,jm,xm->x", U0, f.coefficients, P0)
        return vals.reshape(shp)
    theta = np.asarray(points[0], dtype=float)
    P0, _, _ = b.polar_values(np.cos(theta.ravel()))
    P0 = P0 / math.sqrt(b.polar_norm)
    return (P0 @ f.coefficients).reshape(theta.shape)


# -------------------------------------------------------------- integration

def integrate(f: ScalarField) -> float:
    """Integral of the field against the manifold volume measure."""
    g = f.grid_values if f.grid_values is not None else synthesize(f).grid_values
    return float(np.sum(g * f.basis.quadrature_weights()))


def inner_product(f: ScalarField, g: ScalarField) -> float:
    return integrate(f * g)


# ------------------------------------------------------------------ tensors

SPHERE_COMPONENTS = ("rr", "orb")
PRODUCT_COMPONENTS = ("ss", "sx", "xx", "orb")


@dataclass(frozen=True)
class SymTensorField:
    """Symmetric 2-tensor as orthonormal-frame component grids.

    Components on a sphere: ``rr`` along e_theta and ``orb`` along each of
    the (n-1) orbit directions.  On a product: ``ss``, ``sx``, ``xx`` in
    the (e_s, e_chi) block and ``orb`` along the (d-1) orbit directions.
    Off-diagonal components other than ``sx`` vanish for zonal data.
    """

    basis: ModeBasis
    components: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        want = PRODUCT_COMPONENTS if self.basis.is_product else SPHERE_COMPONENTS
        comps = {}
        for name in want:
            arr = self.components.get(name)
            if arr is None:
                arr = np.zeros(self.basis.grid_shape)
            comps[name] = _freeze(np.broadcast_to(arr, self.basis.grid_shape))
        object.__setattr__(self, "components", comps)

    @property
    def orbit_multiplicity(self) -> int:
        b = self.basis
        return (b.sphere_dim - 1) if b.is_product else (b.n - 1)

    def trace_values(self) -> np.ndarray:
        c = self.components
        if self.basis.is_product:
            return c["ss"] + c["xx"] + self.orbit_multiplicity * c["orb"]
        return c["rr"] + self.orbit_multiplicity * c["orb"]

    def trace(self) -> ScalarField:
        return field_from_grid(self.basis, self.trace_values())

    def norm_squared_values(self) -> np.ndarray:
        c = self.components
        if self.basis.is_product:
            return (c["ss"] ** 2 + 2.0 * c["sx"] ** 2 + c["xx"] ** 2
                    + self.orbit_multiplicity * c["orb"] ** 2)
        return c["rr"] ** 2 + self.orbit_multiplicity * c["orb"] ** 2

    def norm_squared(self) -> ScalarField:
        return field_from_grid(self.basis, self.norm_squared_values())

    def bilinear(self, grad_u: tuple, grad_v: tuple) -> np.ndarray:
        """T(X, Y) for frame vectors X, Y given as component tuples."""
        c = self.components
        if self.basis.is_product:
            us, ux = grad_u
            vs, vx = grad_v
            return (c["ss"] * us * vs + c["sx"] * (us * vx + ux * vs)
                    + c["xx"] * ux * vx)
        (ur,) = grad_u
        (vr,) = grad_v
        return c["rr"] * ur * vr

    def __add__(self, other):
        return SymTensorField(self.basis, {
            k: self.components[k] + other.components[k] for k in self.components})

    def __sub__(self, other):
        return SymTensorField(self.basis, {
            k: self.components[k] - other.components[k] for k in self.components})

    def __mul__(self, scalar):
        if isinstance(scalar, ScalarField):
            scalar = scalar._grid()
        return SymTensorField(self.basis, {
            k: self.components[k] * scalar for k in self.components})

    __rmul__ = __mul__


def metric_tensor(basis: ModeBasis) -> SymTensorField:
    ones = np.ones(basis.grid_shape)
    if basis.is_product:
        return SymTensorField(basis, {"ss": ones, "xx": ones, "orb": ones})
    return SymTensorField(basis, {"rr": ones, "orb": ones})


# ----------------------------------------------------------- differentiation

def _sphere_partials(f: ScalarField):
    """theta-derivatives of a zonal field at the polar nodes."""
    b = f.basis
    P0, P1, P2 = b.polar_tables()
    t, _ = b.polar_rule()
    sin_t = np.sqrt(1.0 - t ** 2)
    ft = P1 @ f.coefficients
    ftt = P2 @ f.coefficients
    f_th = -sin_t * ft
    f_thth = (1.0 - t ** 2) * ftt - t * ft
    return f_th, f_thth, ft


def _product_partials(f: ScalarField):
    b = f.basis
    P0, P1, P2 = b.polar_tables()
    U0, U1, U2 = b.circle_tables()
    t, _ = b.polar_rule()
    sin_t = np.sqrt(1.0 - t ** 2)
    C = f.coefficients
    ft = U0 @ C @ P1.T
    ftt = U0 @ C @ P2.T
    f_s = U1 @ C @ P0.T
    f_ss = U2 @ C @ P0.T
    f_st = U1 @ C @ P1.T
    f_x = -sin_t[None, :] * ft
    f_xx = (1.0 - t ** 2)[None, :] * ftt - t[None, :] * ft
    f_sx = -sin_t[None, :] * f_st
    return f_s, f_ss, f_x, f_xx, f_sx, ft


def gradient_components(f: ScalarField):
    """Orthonormal-frame gradient components on the grid."""
    if f.coefficients is None:
        raise ValueError("differentiation needs coefficients")
    b = f.basis
    if b.is_product:
        f_s, _, f_x, _, _, _ = _product_partials(f)
        return (f_s, f_x / b.radius)
    f_th, _, _ = _sphere_partials(f)
    return (f_th / b.radius,)


def gradient_norm_squared(f: ScalarField) -> ScalarField:
    comps = gradient_components(f)
    vals = sum(c ** 2 for c in comps)
    return field_from_grid(f.basis, vals)


def hessian(f: ScalarField) -> SymTensorField:
    """Covariant Hessian of a zonal field in the adapted frame.

    The orbit component of a warped sphere direction is (cot chi) f_chi,
    written as -cos(chi) f_t so the expression stays regular at the axis.
    """
    if f.coefficients is None:
        raise ValueError("differentiation needs coefficients")
    b = f.basis
    t, _ = b.polar_rule()
    if b.is_product:
        f_s, f_ss, f_x, f_xx, f_sx, ft = _product_partials(f)
        r2 = b.radius ** 2
        return SymTensorField(b, {
            "ss": f_ss,
            "sx": f_sx / b.radius,
            "xx": f_xx / r2,
            "orb": -t[None, :] * ft / r2,
        })
    f_th, f_thth, ft = _sphere_partials(f)
    r2 = b.radius ** 2
    return SymTensorField(b, {"rr": f_thth / r2, "orb": -t * ft / r2})


def frame_jets(f: ScalarField, *points):
    """Value, frame gradient, and frame Hessian at arbitrary points.

    Returns ``(value, grad, hess)`` where ``grad`` is a tuple of frame
    components and ``hess`` a dict keyed like the tensor components.
    Points follow the ``evaluate`` convention and are broadcast pointwise.
    """
    if f.coefficients is None:
        raise ValueError("differentiation needs coefficients")
    b = f.basis
    if b.is_product:
        s, chi = np.broadcast_arrays(np.asarray(points[0], float),
                                     np.asarray(points[1], float))
        shp = s.shape
        t = np.cos(chi.ravel())
        sin_t = np.sin(chi.ravel())
        U0, U1, U2 = b.circle_values(s.ravel())
        P0, P1, P2 = b.polar_values(t)
        norm = math.sqrt(b.polar_norm)
        P0, P1, P2 = P0 / norm, P1 / norm, P2 / norm
        C = f.coefficients

        def mix(U, P):
            return np.einsum("xj,jm,xm->x", U, C, P).reshape(shp)

        val = mix(U0, P0)
        ft = mix(U0, P1)
        ftt = mix(U0, P2)
        f_s = mix(U1, P0)
        f_ss = mix(U2, P0)
        f_st = mix(U1, P1)
        sin_t = sin_t.reshape(shp)
        t = t.reshape(shp)
        f_x = -sin_t * ft
        f_xx = (1.0 - t ** 2) * ftt - t * ft
        f_sx = -sin_t * f_st
        r = b.radius
        grad = (f_s, f_x / r)
        hess = {"ss": f_ss, "sx": f_sx / r, "xx": f_xx / r ** 2,
                "orb": -t * ft / r ** 2}
        return val, grad, hess
    theta = np.asarray(points[0], dtype=float)
    t = np.cos(theta.ravel())
    P0, P1, P2 = b.polar_values(t)
    norm = math.sqrt(b.polar_norm)
    c = f.coefficients
    val = (P0 @ c).reshape(theta.shape) / norm
    ft = (P1 @ c).reshape(theta.shape) / norm
    ftt = (P2 @ c).reshape(theta.shape) / norm
    t = t.reshape(theta.shape)
    sin_t = np.sin(theta)
    f_th = -sin_t * ft
    f_thth = (1.0 - t ** 2) * ftt - t * ft
    r = f.basis.radius
    grad = (f_th / r,)
    hess = {"rr": f_thth / r ** 2, "orb": -t * ft / r ** 2}
    return val, grad, hess


def laplacian(f: ScalarField) -> ScalarField:
    """Laplace-Beltrami operator applied mode-wise (exact in the basis)."""
    if f.coefficients is None:
        raise ValueError("laplacian needs coefficients")
    lam = f.basis.neg_laplacian_eigenvalues()
    return synthesize(field_from_modes(f.basis, -lam * f.coefficients))


def differentiate(f: ScalarField, order: int):
    """Spectral differentiation: order 1 gives |grad f|^2, order 2 the Hessian."""
    if order == 1:
        return gradient_norm_squared(f)
    if order == 2:
        return hessian(f)
    raise ValueError("order must be 1 or 2")


# ------------------------------------------------------------------- dumps

def field_to_csv(f: ScalarField, path):
    """Grid dump: node_index, chart coordinates, value."""
    b = f.basis
    g = f.grid_values if f.grid_values is not None else synthesize(f).grid_values
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if b.is_product:
            writer.writerow(["node_index", "coord_1", "coord_2", "value"])
            s = b.circle_points()
            chi = b.polar_angles()
            idx = 0
            for i in range(b.circle_nodes):
                for j in range(b.sphere_nodes):
                    writer.writerow([idx, repr(float(s[i])),
                                     repr(float(chi[j])),
                                     repr(float(g[i, j]))])
                    idx += 1
        else:
            writer.writerow(["node_index", "coord_1", "value"])
            theta = b.polar_angles()
            for j in range(b.sphere_nodes):
                writer.writerow([j, repr(float(theta[j])),
                                 repr(float(g[j]))])


def modes_to_csv(f: ScalarField, path):
    """Mode dump: mode_id, coefficient."""
    if f.coefficients is None:
        raise ValueError("mode dump needs coefficients")
    ids = f.basis.mode_ids()
    flat = f.coefficients.ravel()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode_id", "coefficient"])
        for mid, c in zip(ids, flat):
            writer.writerow([mid, repr(float(c))])
