"""Analytic differential geometry of the catalog boundary surfaces.

Each surface is described by a level set ``phi`` with exact gradient and
Hessian, so normals and curvature operators come out at machine precision.
The outward normal field is extended off the surface as the unit gradient
``n = grad(phi)/|grad(phi)|``; with that extension ``|n| == 1`` holds in a
neighbourhood, which makes the derivative of ``n`` tangent-valued and the
shape operator self-adjoint on the tangent plane by construction.

Sign conventions used throughout the package:

* ``n`` points outward (into increasing ``phi``).
* Second fundamental form ``II = -grad(n)``, so ``II`` is negative definite
  on a sphere with the outward normal: ``II(v, v) = -|v|^2`` on the unit
  sphere.
* Shape operator ``S(v) = -grad_v(n)``; ``II(v, w) = <S(v), w>``.
* Gauss curvature ``K = det`` and mean curvature ``H = trace`` of the
  tangent-plane matrix of ``S`` (unit sphere: ``K = 1``, ``H = -2``).

Vectorised conventions: points are ``(3,)`` or ``(N, 3)`` arrays; all
operations broadcast over the leading axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotTangent, PointOffSurface

ON_SURFACE_TOL = 1e-10
TANGENT_TOL = 1e-10


def _atleast_2d_points(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


def _squeeze(arr, was_single):
    return arr[0] if was_single else arr


class SurfaceGeometry:
    """Base class: a closed (or periodic flat) surface given by a level set.

    Subclasses supply ``phi``, ``grad_phi``, ``hess_phi`` (all exact) and a
    parameterisation used by :func:`surface_quadrature`.
    """

    kind = "abstract"

    def phi(self, x):
        raise NotImplementedError

    def grad_phi(self, x):
        raise NotImplementedError

    def hess_phi(self, x):
        raise NotImplementedError

    # sympy expression of phi in (x, y, z); used to build tangent catalog
    # fields and boundary operators symbolically
    def phi_sympy(self, x, y, z):
        raise NotImplementedError

    def contains(self, x, tol=ON_SURFACE_TOL):
        x2, single = _atleast_2d_points(x)
        ok = np.abs(self.phi(x2)) < tol
        return _squeeze(ok, single)

    def require_on_surface(self, x, tol=ON_SURFACE_TOL):
        x2, _ = _atleast_2d_points(x)
        vals = np.abs(self.phi(x2))
        if np.any(vals >= tol):
            worst = float(vals.max())
            raise PointOffSurface(
                f"|phi(x)| = {worst:.3e} exceeds tolerance {tol:.1e} on {self.kind}"
            )

    def quadrature_nodes(self, n_u=64, n_v=128):
        """Return ``(points (N,3), weights (N,))`` such that
        ``sum(w_i f(p_i))`` approximates the surface integral of ``f``."""
        raise NotImplementedError


class Sphere(SurfaceGeometry):
    """Sphere of given radius centred at the origin; ``phi = (|x|^2 - R^2)/2``."""

    def __init__(self, radius=1.0):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.kind = "unit_sphere" if radius == 1.0 else "sphere"

    def phi(self, x):
        x2, single = _atleast_2d_points(x)
        val = 0.5 * (np.sum(x2 * x2, axis=-1) - self.radius**2)
        return _squeeze(val, single)

    def grad_phi(self, x):
        x2, single = _atleast_2d_points(x)
        return _squeeze(x2.copy(), single)

    def hess_phi(self, x):
        x2, single = _atleast_2d_points(x)
        h = np.broadcast_to(np.eye(3), (x2.shape[0], 3, 3)).copy()
        return _squeeze(h, single)

    def phi_sympy(self, x, y, z):
        return (x * x + y * y + z * z - self.radius**2) / 2

    def quadrature_nodes(self, n_u=64, n_v=128):
        # Gauss-Legendre in t = cos(theta), trapezoid in phi; the area
        # element in (t, phi) is the constant R^2.
        t, wt = np.polynomial.legendre.leggauss(n_u)
        p = 2 * np.pi * np.arange(n_v) / n_v
        wp = 2 * np.pi / n_v
        tt, pp = np.meshgrid(t, p, indexing="ij")
        st = np.sqrt(1.0 - tt**2)
        R = self.radius
        pts = np.stack(
            [R * st * np.cos(pp), R * st * np.sin(pp), R * tt], axis=-1
        ).reshape(-1, 3)
        w = (R**2 * wt[:, None] * wp * np.ones_like(pp)).reshape(-1)
        return pts, w


def UnitSphere():
    return Sphere(1.0)


class Ellipsoid(SurfaceGeometry):
    """Axis-aligned ellipsoid ``(x/a)^2 + (y/b)^2 + (z/c)^2 = 1``."""

    kind = "ellipsoid"

    def __init__(self, a, b, c):
        if min(a, b, c) <= 0:
            raise ValueError("semi-axes must be positive")
        self.axes = (float(a), float(b), float(c))

    def phi(self, x):
        a, b, c = self.axes
        x2, single = _atleast_2d_points(x)
        val = 0.5 * (
            (x2[:, 0] / a) ** 2 + (x2[:, 1] / b) ** 2 + (x2[:, 2] / c) ** 2 - 1.0
        )
        return _squeeze(val, single)

    def grad_phi(self, x):
        a, b, c = self.axes
        x2, single = _atleast_2d_points(x)
        g = x2 / np.array([a**2, b**2, c**2])
        return _squeeze(g, single)

    def hess_phi(self, x):
        a, b, c = self.axes
        x2, single = _atleast_2d_points(x)
        h = np.broadcast_to(
            np.diag([1 / a**2, 1 / b**2, 1 / c**2]), (x2.shape[0], 3, 3)
        ).copy()
        return _squeeze(h, single)

    def phi_sympy(self, x, y, z):
        a, b, c = self.axes
        return ((x / a) ** 2 + (y / b) ** 2 + (z / c) ** 2 - 1) / 2

    def quadrature_nodes(self, n_u=64, n_v=128):
        # Parameterise by (t = cos(theta), phi); the Jacobian
        # |x_t cross x_phi| is smooth and strictly positive, so the product
        # Gauss x trapezoid rule converges spectrally for smooth integrands.
        a, b, c = self.axes
        t, wt = np.polynomial.legendre.leggauss(n_u)
        p = 2 * np.pi * np.arange(n_v) / n_v
        wp = 2 * np.pi / n_v
        tt, pp = np.meshgrid(t, p, indexing="ij")
        st = np.sqrt(1.0 - tt**2)
        pts = np.stack(
            [a * st * np.cos(pp), b * st * np.sin(pp), c * tt], axis=-1
        ).reshape(-1, 3)
        jac = np.sqrt(
            (b * c) ** 2 * (1 - tt**2) * np.cos(pp) ** 2
            + (a * c) ** 2 * (1 - tt**2) * np.sin(pp) ** 2
            + (a * b) ** 2 * tt**2
        )
        w = (jac * wt[:, None] * wp).reshape(-1)
        return pts, w


class FlatWall(SurfaceGeometry):
    """Horizontal plane ``z = z0`` with outward normal ``orientation * e_z``.

    The quadrature patch is ``[0, Lx) x [0, Ly)``, matching the periodic
    channel cell the solver uses.
    """

    kind = "flat_wall"

    def __init__(self, z0=1.0, orientation=1, Lx=2 * np.pi, Ly=2 * np.pi):
        if orientation not in (-1, 1):
            raise ValueError("orientation must be +1 or -1")
        self.z0 = float(z0)
        self.orientation = int(orientation)
        self.Lx = float(Lx)
        self.Ly = float(Ly)

    def phi(self, x):
        x2, single = _atleast_2d_points(x)
        val = self.orientation * (x2[:, 2] - self.z0)
        return _squeeze(val, single)

    def grad_phi(self, x):
        x2, single = _atleast_2d_points(x)
        g = np.zeros_like(x2)
        g[:, 2] = self.orientation
        return _squeeze(g, single)

    def hess_phi(self, x):
        x2, single = _atleast_2d_points(x)
        return _squeeze(np.zeros((x2.shape[0], 3, 3)), single)

    def phi_sympy(self, x, y, z):
        return self.orientation * (z - self.z0)

    def quadrature_nodes(self, n_u=64, n_v=128):
        # Tensor Gauss rule on the periodic patch.
        xg, wx = np.polynomial.legendre.leggauss(n_u)
        yg, wy = np.polynomial.legendre.leggauss(n_v)
        xs = 0.5 * self.Lx * (xg + 1.0)
        ys = 0.5 * self.Ly * (yg + 1.0)
        wxs = 0.5 * self.Lx * wx
        wys = 0.5 * self.Ly * wy
        xx, yy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.stack([xx, yy, np.full_like(xx, self.z0)], axis=-1).reshape(-1, 3)
        w = (wxs[:, None] * wys[None, :]).reshape(-1)
        return pts, w


SURFACE_KINDS = {
    "unit_sphere": lambda **kw: Sphere(1.0),
    "sphere": lambda radius=1.0, **kw: Sphere(radius),
    "ellipsoid": lambda semi_axes=(2.0, 1.0, 1.0), **kw: Ellipsoid(*semi_axes),
    "flat_wall": lambda z0=1.0, orientation=1, **kw: FlatWall(z0, orientation),
}


def make_surface(name, **params):
    """Build a catalog surface by name (used by the config/CLI layer)."""
    key = name.lower().replace("-", "_")
    if key not in SURFACE_KINDS:
        raise ValueError(f"unknown surface '{name}'")
    return SURFACE_KINDS[key](**params)


# -- pointwise geometric operators -------------------------------------------


def normal(surface, x, check=True):
    """Outward unit normal ``grad(phi)/|grad(phi)|`` at on-surface points."""
    if check:
        surface.require_on_surface(x)
    x2, single = _atleast_2d_points(x)
    g = np.atleast_2d(surface.grad_phi(x2))
    norms = np.linalg.norm(g, axis=-1, keepdims=True)
    return _squeeze(g / norms, single)


def normal_derivative(surface, x):
    """Matrix ``Dn`` with ``Dn[i, j] = d n_i / d x_j`` for the unit-gradient
    extension of the normal.  ``Dn`` maps any vector into the tangent plane
    because ``|n| == 1`` holds identically off the surface."""
    x2, single = _atleast_2d_points(x)
    g = np.atleast_2d(surface.grad_phi(x2))
    h = surface.hess_phi(x2)
    if h.ndim == 2:
        h = h[None, :, :]
    gnorm = np.linalg.norm(g, axis=-1)
    n = g / gnorm[:, None]
    hn = np.einsum("pij,pj->pi", h, n)
    dn = (h - n[:, :, None] * hn[:, None, :]) / gnorm[:, None, None]
    return _squeeze(dn, single)


def shape_operator(surface, x, v, check=True):
    """Apply ``S(v) = -grad_v(n)`` to a tangent vector ``v`` at ``x``."""
    if check:
        surface.require_on_surface(x)
    x2, single = _atleast_2d_points(x)
    v2 = np.asarray(v, dtype=float)
    if v2.ndim == 1:
        v2 = v2[None, :]
    n = np.atleast_2d(normal(surface, x2, check=False))
    dots = np.abs(np.einsum("pi,pi->p", v2, n))
    if check and np.any(dots >= TANGENT_TOL):
        raise NotTangent(f"|v.n| = {float(dots.max()):.3e} exceeds {TANGENT_TOL:.1e}")
    dn = normal_derivative(surface, x2)
    if dn.ndim == 2:
        dn = dn[None, :, :]
    sv = -np.einsum("pij,pj->pi", dn, v2)
    return _squeeze(sv, single)


def second_fundamental_form(surface, x, v, w, check=True):
    """``II(v, w) = <S(v), w>`` for tangent vectors ``v, w``."""
    sv = shape_operator(surface, x, v, check=check)
    w2 = np.asarray(w, dtype=float)
    return np.sum(np.atleast_2d(sv) * np.atleast_2d(w2), axis=-1).squeeze()


def curvatures(surface, x, check=True):
    """Gauss and mean curvature ``(K, H)`` from the tangent-plane matrix of
    the shape operator; both are frame independent."""
    if check:
        surface.require_on_surface(x)
    x2, single = _atleast_2d_points(x)
    frames = tangent_frame(surface, x2, check=False)
    dn = normal_derivative(surface, x2)
    if dn.ndim == 2:
        dn = dn[None, :, :]
    e1, e2 = frames.e1, frames.e2
    if e1.ndim == 1:
        e1, e2 = e1[None, :], e2[None, :]
    s11 = -np.einsum("pi,pij,pj->p", e1, dn, e1)
    s12 = -np.einsum("pi,pij,pj->p", e1, dn, e2)
    s21 = -np.einsum("pi,pij,pj->p", e2, dn, e1)
    s22 = -np.einsum("pi,pij,pj->p", e2, dn, e2)
    K = s11 * s22 - s12 * s21
    H = s11 + s22
    if single:
        return float(K[0]), float(H[0])
    return K, H


@dataclass
class TangentFrame:
    """Right-handed orthonormal frame ``(e1, e2, n)`` at a boundary point."""

    point: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    n: np.ndarray


def tangent_frame(surface, x, check=True):
    """Deterministic adapted frame: ``e1`` is the normalised tangential
    projection of the Cartesian axis least aligned with ``n`` (ties resolved
    by axis order), and ``e2 = n x e1``."""
    if check:
        surface.require_on_surface(x)
    x2, single = _atleast_2d_points(x)
    n = np.atleast_2d(normal(surface, x2, check=False))
    # smallest |axis.n|; argmin takes the first index on ties
    pick = np.argmin(np.abs(n), axis=-1)
    axis = np.zeros_like(n)
    axis[np.arange(len(pick)), pick] = 1.0
    e1 = axis - np.einsum("pi,pi->p", axis, n)[:, None] * n
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(n, e1)
    return TangentFrame(
        point=_squeeze(x2, single),
        e1=_squeeze(e1, single),
        e2=_squeeze(e2, single),
        n=_squeeze(n, single),
    )


def tangential_project(n, V):
    """``pi(V) = V - <V, n> n``; ``n`` may be a frame or a unit normal."""
    if isinstance(n, TangentFrame):
        n = n.n
    n2 = np.atleast_2d(np.asarray(n, dtype=float))
    V2, single = _atleast_2d_points(V)
    out = V2 - np.einsum("pi,pi->p", V2, n2)[:, None] * n2
    return _squeeze(out, single)


def rotate_tangent(n, V, check=True):
    """In-plane 90-degree rotation ``R(V) = n x V`` of a tangent vector."""
    if isinstance(n, TangentFrame):
        n = n.n
    n2 = np.atleast_2d(np.asarray(n, dtype=float))
    V2, single = _atleast_2d_points(V)
    if check:
        dots = np.abs(np.einsum("pi,pi->p", V2, n2))
        if np.any(dots >= TANGENT_TOL):
            raise NotTangent(
                f"|V.n| = {float(dots.max()):.3e} exceeds {TANGENT_TOL:.1e}"
            )
    return _squeeze(np.cross(n2, V2), single)


# -- quadrature ---------------------------------------------------------------


def surface_quadrature(surface, f, n_u=64, n_v=128):
    """Integrate a scalar evaluator ``f(points) -> (N,)`` over the surface."""
    pts, w = surface.quadrature_nodes(n_u, n_v)
    vals = np.asarray(f(pts), dtype=float)
    return float(np.sum(w * vals))


class BallDomain:
    """Solid ball of given radius: spherical-coordinate product rule with
    Gauss-Legendre nodes in radius and in cos(theta), trapezoid in phi.
    Interior Gauss nodes keep the rule away from the r = 0 coordinate
    singularity."""

    def __init__(self, radius=1.0, n_r=48, n_t=48, n_p=48):
        self.radius = float(radius)
        self.n_r, self.n_t, self.n_p = n_r, n_t, n_p
        self.surface = Sphere(radius)

    @property
    def resolution(self):
        return f"ball {self.n_r}x{self.n_t}x{self.n_p}"

    def refined(self, factor=2):
        return BallDomain(
            self.radius, self.n_r * factor, self.n_t * factor, self.n_p * factor
        )

    def volume_nodes(self):
        rg, wr = np.polynomial.legendre.leggauss(self.n_r)
        r = 0.5 * self.radius * (rg + 1.0)
        wr = 0.5 * self.radius * wr
        t, wt = np.polynomial.legendre.leggauss(self.n_t)
        p = 2 * np.pi * np.arange(self.n_p) / self.n_p
        wp = 2 * np.pi / self.n_p
        rr, tt, pp = np.meshgrid(r, t, p, indexing="ij")
        st = np.sqrt(1.0 - tt**2)
        pts = np.stack(
            [rr * st * np.cos(pp), rr * st * np.sin(pp), rr * tt], axis=-1
        ).reshape(-1, 3)
        w = (rr**2 * wr[:, None, None] * wt[None, :, None] * wp).reshape(-1)
        return pts, w

    def boundary_nodes(self, n_u=64, n_v=128):
        return self.surface.quadrature_nodes(n_u, n_v)

    def boundary_normals(self, pts):
        return normal(self.surface, pts, check=False)


class ChannelCellDomain:
    """One periodic channel cell ``[0,Lx) x [0,Ly) x [-1,1]``; the boundary
    consists of the two flat walls (periodic sides contribute nothing)."""

    def __init__(self, Lx=2 * np.pi, Ly=2 * np.pi, n_x=16, n_y=16, n_z=48):
        self.Lx, self.Ly = float(Lx), float(Ly)
        self.n_x, self.n_y, self.n_z = n_x, n_y, n_z
        self.walls = (
            FlatWall(z0=1.0, orientation=+1, Lx=Lx, Ly=Ly),
            FlatWall(z0=-1.0, orientation=-1, Lx=Lx, Ly=Ly),
        )

    @property
    def resolution(self):
        return f"cell {self.n_x}x{self.n_y}x{self.n_z}"

    def refined(self, factor=2):
        return ChannelCellDomain(
            self.Lx, self.Ly, self.n_x * factor, self.n_y * factor, self.n_z * factor
        )

    def volume_nodes(self):
        # trapezoid in the periodic directions, Gauss-Legendre across the gap
        xs = self.Lx * np.arange(self.n_x) / self.n_x
        ys = self.Ly * np.arange(self.n_y) / self.n_y
        zg, wz = np.polynomial.legendre.leggauss(self.n_z)
        wx = self.Lx / self.n_x
        wy = self.Ly / self.n_y
        xx, yy, zz = np.meshgrid(xs, ys, zg, indexing="ij")
        pts = np.stack([xx, yy, zz], axis=-1).reshape(-1, 3)
        w = (np.ones_like(xx) * wx * wy * wz[None, None, :]).reshape(-1)
        return pts, w

    def boundary_nodes(self, n_u=64, n_v=128):
        pts = []
        wts = []
        norms = []
        for wall in self.walls:
            p, w = wall.quadrature_nodes(n_u, n_v)
            pts.append(p)
            wts.append(w)
            nvec = np.zeros_like(p)
            nvec[:, 2] = wall.orientation
            norms.append(nvec)
        self._last_normals = np.concatenate(norms)
        return np.concatenate(pts), np.concatenate(wts)

    def boundary_normals(self, pts):
        nvec = np.zeros_like(pts)
        nvec[:, 2] = np.where(pts[:, 2] > 0, 1.0, -1.0)
        return nvec
