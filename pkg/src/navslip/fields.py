"""Analytic vector fields with exact derivative evaluators.

Fields are stored as sympy expressions in Cartesian ``(x, y, z)`` and
compiled on demand to vectorised numpy callables, so every derivative of
every order is closed form.  That keeps the identity checks oracle-grade:
residuals measure quadrature error only, never differentiation error.

The catalog covers the fields the boundary/identity/solver tests use:
rigid rotations, seeded solenoidal polynomials (optionally tangent to a
catalog surface), the channel Robin modes, Taylor-Green, gradient fields,
and a handful of small named helpers (``radial``, ``shear_z``, constants).
"""

from __future__ import annotations

import itertools

import numpy as np
import sympy as sp

from .errors import OrderTooHigh, UnknownCatalogName
from .geometry import SurfaceGeometry

X, Y, Z = sp.symbols("x y z", real=True)
_COORDS = (X, Y, Z)


def _compile(exprs):
    """Lambdify a flat list of sympy expressions into one vectorised callable
    mapping points ``(N, 3)`` to an array ``(N, len(exprs))``."""
    fns = [sp.lambdify(_COORDS, e, modules="numpy") for e in exprs]

    def evaluate(pts):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        p = pts[None, :] if single else pts
        cols = []
        for fn in fns:
            v = fn(p[:, 0], p[:, 1], p[:, 2])
            cols.append(np.broadcast_to(np.asarray(v, dtype=float), (p.shape[0],)))
        out = np.stack(cols, axis=-1)
        return out[0] if single else out

    return evaluate


class AnalyticScalarField:
    """Scalar field with exact value and gradient."""

    def __init__(self, expr, label="scalar"):
        self.expr = sp.sympify(expr)
        self.label = label
        self._value = None
        self._grad = None

    def value(self, pts):
        if self._value is None:
            self._value = _compile([self.expr])
        out = self._value(pts)
        return out[..., 0]

    def gradient(self, pts):
        if self._grad is None:
            self._grad = _compile([sp.diff(self.expr, c) for c in _COORDS])
        return self._grad(pts)

    def gradient_field(self):
        return AnalyticField(
            [sp.diff(self.expr, c) for c in _COORDS], label=f"grad({self.label})"
        )


class AnalyticField:
    """Vector field with exact value / jacobian / hessian evaluators.

    ``jacobian(pts)[i, j] = d u_i / d x_j``; ``hessian(pts)[i, j, k]`` is the
    second derivative of component ``i`` in directions ``(j, k)``.
    """

    def __init__(self, exprs, label="field", solenoidal=None):
        exprs = [sp.expand(sp.sympify(e)) for e in exprs]
        if len(exprs) != 3:
            raise ValueError("an analytic vector field needs 3 components")
        self.exprs = tuple(exprs)
        self.label = label
        if solenoidal is None:
            solenoidal = sp.simplify(self.divergence_expr()) == 0
        self.solenoidal = bool(solenoidal)
        self._compiled = {}

    def __repr__(self):
        return f"AnalyticField({self.label})"

    def divergence_expr(self):
        return sum(sp.diff(e, c) for e, c in zip(self.exprs, _COORDS))

    def _tensor(self, order):
        """Compiled evaluator of all order-``order`` partials:
        ``(N, 3, 3, ..., 3)`` with component axis first, then one axis per
        derivative direction."""
        key = ("tensor", order)
        if key not in self._compiled:
            flat = []
            for comp in self.exprs:
                for dirs in itertools.product(range(3), repeat=order):
                    e = comp
                    for d in dirs:
                        e = sp.diff(e, _COORDS[d])
                    flat.append(e)
            fn = _compile(flat)
            shape = (3,) + (3,) * order

            def evaluate(pts, fn=fn, shape=shape):
                out = fn(pts)
                return out.reshape(out.shape[:-1] + shape)

            self._compiled[key] = evaluate
        return self._compiled[key]

    def value(self, pts):
        return self._tensor(0)(pts)

    def jacobian(self, pts):
        return self._tensor(1)(pts)

    def hessian(self, pts):
        return self._tensor(2)(pts)

    def derivative_tensor(self, order, pts):
        return self._tensor(order)(pts)

    def curl(self):
        u1, u2, u3 = self.exprs
        return AnalyticField(
            [
                sp.diff(u3, Y) - sp.diff(u2, Z),
                sp.diff(u1, Z) - sp.diff(u3, X),
                sp.diff(u2, X) - sp.diff(u1, Y),
            ],
            label=f"curl({self.label})",
            solenoidal=True,
        )

    def scaled(self, factor):
        return AnalyticField(
            [factor * e for e in self.exprs],
            label=f"{factor}*{self.label}",
            solenoidal=self.solenoidal,
        )

    def __add__(self, other):
        return AnalyticField(
            [a + b for a, b in zip(self.exprs, other.exprs)],
            label=f"{self.label}+{other.label}",
            solenoidal=self.solenoidal and other.solenoidal,
        )


# -- differential operators ---------------------------------------------------


def curl(u):
    return u.curl()


def iterated_curl(u, r, max_order=12):
    """Apply the curl ``r`` times; ``r = 0`` is the identity."""
    if r < 0 or r > max_order:
        raise OrderTooHigh(f"curl order {r} outside [0, {max_order}]")
    out = u
    for _ in range(r):
        out = out.curl()
    return out


def divergence(u):
    return AnalyticScalarField(u.divergence_expr(), label=f"div({u.label})")


def gradient(u):
    """Jacobian evaluator of a vector field (3x3 tensor field)."""
    if isinstance(u, AnalyticScalarField):
        return u.gradient_field()
    return u.jacobian


# -- Robin-mode machinery ------------------------------------------------------


def robin_wavenumber(zeta, branch=0, parity="even", tol=1e-14):
    """Root of the wall eigenvalue condition by bisection.

    ``parity='even'`` solves ``lam * tan(lam) = 1/zeta`` on
    ``(branch*pi, branch*pi + pi/2)``; ``parity='odd'`` solves
    ``lam * cot(lam) = -1/zeta`` on ``(branch*pi + pi/2, (branch+1)*pi)``.
    The even/odd roots make ``cos(lam z)`` / ``sin(lam z)`` satisfy the
    slip (Robin) condition at both walls ``z = +-1``.
    """
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    if parity == "even":
        f = lambda lam: lam * np.tan(lam) - 1.0 / zeta
        lo = branch * np.pi + 1e-12
        hi = branch * np.pi + np.pi / 2 - 1e-12
    elif parity == "odd":
        f = lambda lam: lam * np.cos(lam) + np.sin(lam) / zeta
        lo = branch * np.pi + np.pi / 2 + 1e-12
        hi = (branch + 1) * np.pi - 1e-12
    else:
        raise ValueError("parity must be 'even' or 'odd'")
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise ValueError("bisection bracket does not straddle a root")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) * flo <= 0:
            hi = mid
        else:
            lo, flo = mid, f(mid)
    return 0.5 * (lo + hi)


# -- catalog -------------------------------------------------------------------


def _random_poly(rng, degree, coeff_range=3):
    """Random polynomial in (x, y, z) of total degree <= degree with small
    integer coefficients (kept exact under sympy arithmetic)."""
    terms = []
    for total in range(degree + 1):
        for i in range(total + 1):
            for j in range(total - i + 1):
                k = total - i - j
                c = int(rng.integers(-coeff_range, coeff_range + 1))
                if c != 0:
                    terms.append(c * X**i * Y**j * Z**k)
    if not terms:
        terms = [X]
    return sp.Add(*terms)


def rigid_rotation(axis=(0.0, 0.0, 1.0)):
    a1, a2, a3 = [sp.nsimplify(a) for a in axis]
    return AnalyticField(
        [a2 * Z - a3 * Y, a3 * X - a1 * Z, a1 * Y - a2 * X],
        label=f"rigid_rotation({axis})",
        solenoidal=True,
    )


def solenoidal_poly(seed=0, degree=3, tangent_to=None):
    """Seeded divergence-free polynomial field.

    Without ``tangent_to`` the field is the curl of a random polynomial
    potential.  With a surface, the field is built as
    ``grad(f) x grad(phi)`` for a random polynomial ``f`` and the surface
    level set ``phi``: such fields are exactly divergence free *and*
    exactly tangent to every level set of ``phi``, which is how the
    boundary-identity corpus realises "solenoidal and tangent" without any
    numerical projection step.
    """
    rng = np.random.default_rng(seed)
    if tangent_to is None:
        pot = [_random_poly(rng, degree + 1) for _ in range(3)]
        return AnalyticField(
            [
                sp.diff(pot[2], Y) - sp.diff(pot[1], Z),
                sp.diff(pot[0], Z) - sp.diff(pot[2], X),
                sp.diff(pot[1], X) - sp.diff(pot[0], Y),
            ],
            label=f"solenoidal_poly(seed={seed},deg={degree})",
            solenoidal=True,
        )
    if not isinstance(tangent_to, SurfaceGeometry):
        raise TypeError("tangent_to must be a SurfaceGeometry")
    f = _random_poly(rng, degree)
    phi = tangent_to.phi_sympy(X, Y, Z)
    gf = [sp.diff(f, c) for c in _COORDS]
    gp = [sp.diff(phi, c) for c in _COORDS]
    return AnalyticField(
        [
            gf[1] * gp[2] - gf[2] * gp[1],
            gf[2] * gp[0] - gf[0] * gp[2],
            gf[0] * gp[1] - gf[1] * gp[0],
        ],
        label=f"solenoidal_poly(seed={seed},deg={degree},tangent:{tangent_to.kind})",
        solenoidal=True,
    )


def channel_robin_mode(zeta=1.0, branch=0, direction="x", parity="even",
                       transverse_wavenumber=0):
    """Wall eigenmode ``(cos(lam z), 0, 0)`` (or sin for odd parity) with
    ``lam`` from :func:`robin_wavenumber`; exactly solenoidal, impermeable,
    and slip-condition satisfying at both walls.  An optional integer
    transverse wavenumber modulates the profile in the cross direction
    (``cos(k y)`` for an x-directed mode), which keeps all the wall
    conditions intact."""
    lam = robin_wavenumber(zeta, branch, parity)
    prof = sp.cos(lam * Z) if parity == "even" else sp.sin(lam * Z)
    k = int(transverse_wavenumber)
    if direction == "x":
        mod = sp.cos(k * Y) if k else 1
        exprs = [prof * mod, 0, 0]
    elif direction == "y":
        mod = sp.cos(k * X) if k else 1
        exprs = [0, prof * mod, 0]
    else:
        raise ValueError("direction must be 'x' or 'y'")
    fld = AnalyticField(
        exprs,
        label=f"channel_robin_mode(zeta={zeta},branch={branch},{direction},{parity},k={k})",
        solenoidal=True,
    )
    fld.wavenumber = lam
    fld.zeta = float(zeta)
    return fld


def slip_mode_mix(zeta=1.0):
    """Three-dimensional initial data compatible with the wall conditions:
    a superposition of even and odd Robin z-profiles at slip length
    ``zeta`` carrying transverse modulation.  Divergence-free and
    impermeable by construction, and slip-condition satisfying at both
    walls for every amplitude, so viscous runs start with no wall
    transient.  The cross terms in ``u x omega`` drive a genuinely 3-D
    nonlinear evolution."""
    lam0 = robin_wavenumber(zeta, 0, "even")
    mu0 = robin_wavenumber(zeta, 0, "odd")
    even = sp.cos(lam0 * Z)
    odd = sp.sin(mu0 * Z)
    u1 = even * (1 + sp.Rational(1, 2) * sp.cos(Y)) \
        + sp.Rational(3, 10) * odd * sp.cos(2 * Y)
    u2 = even * (1 - sp.Rational(1, 2) * sp.cos(X)) \
        - sp.Rational(3, 10) * odd * sp.sin(X)
    fld = AnalyticField([u1, u2, 0], label=f"slip_mode_mix(zeta={zeta})",
                        solenoidal=True)
    fld.zeta = float(zeta)
    return fld


def sheared_vortex(zeta=1.0, vortex_amplitude=0.5):
    """Wall-compatible campaign data: Robin shear plus an interior vortex.

    The shear profiles are wall eigenmodes at slip length ``zeta`` (steady
    under inviscid evolution), and the vortex envelope ``(1 - z^2)^4``
    vanishes with three derivatives at the walls, so the nonlinear terms
    it generates stay wall-compatible to high order.  This keeps the
    inviscid reference on the slip relation, which is what makes a clean
    viscosity-rate measurement possible; data with order-one wall
    incompatibility would instead develop a weak layer whose high-order
    norms grow as the viscosity shrinks."""
    lam0 = robin_wavenumber(zeta, 0, "even")
    mu0 = robin_wavenumber(zeta, 0, "odd")
    eps = sp.nsimplify(vortex_amplitude)
    psi = (1 - Z**2) ** 4
    dpsi = sp.diff(psi, Z)
    u1 = sp.cos(lam0 * Z) + eps * dpsi * sp.sin(X)
    u2 = sp.Rational(7, 10) * sp.sin(mu0 * Z) + eps * dpsi * sp.sin(Y)
    u3 = -eps * psi * (sp.cos(X) + sp.cos(Y))
    fld = AnalyticField([u1, u2, u3], label=f"sheared_vortex(zeta={zeta})")
    fld.zeta = float(zeta)
    return fld


def taylor_green():
    """Planar Taylor-Green vortex; each component decays as exp(-2 nu t)
    under viscous evolution because the projected nonlinear term vanishes."""
    return AnalyticField(
        [sp.sin(X) * sp.cos(Y), -sp.cos(X) * sp.sin(Y), 0],
        label="taylor_green",
        solenoidal=True,
    )


def gradient_field(h=None):
    if h is None:
        h = (X**2 + Y**2 + Z**2) / 2
    hs = AnalyticScalarField(h, label="h")
    f = hs.gradient_field()
    f.label = "gradient_field"
    return f


def radial():
    return AnalyticField([X, Y, Z], label="radial", solenoidal=False)


def shear_z():
    return AnalyticField([Z, 0, 0], label="shear_z", solenoidal=True)


def constant(cx=0.0, cy=0.0, cz=0.0):
    return AnalyticField(
        [sp.nsimplify(cx), sp.nsimplify(cy), sp.nsimplify(cz)],
        label=f"constant({cx},{cy},{cz})",
        solenoidal=True,
    )


_CATALOG = {
    "rigid_rotation": rigid_rotation,
    "solenoidal_poly": solenoidal_poly,
    "channel_robin_mode": channel_robin_mode,
    "slip_mode_mix": slip_mode_mix,
    "sheared_vortex": sheared_vortex,
    "taylor_green": taylor_green,
    "gradient_field": gradient_field,
    "radial": radial,
    "shear_z": shear_z,
    "constant": constant,
}


def catalog_names():
    return sorted(_CATALOG)


def catalog_field(name, **params):
    """Instantiate a catalog field by name; raises UnknownCatalogName."""
    key = name.lower()
    if key not in _CATALOG:
        raise UnknownCatalogName(
            f"'{name}' not in catalog: {', '.join(catalog_names())}"
        )
    return _CATALOG[key](**params)


# -- surface-coupled fields ----------------------------------------------------


def normal_field_sympy(surface):
    """The unit-gradient extension of the outward normal as sympy exprs."""
    phi = surface.phi_sympy(X, Y, Z)
    g = [sp.diff(phi, c) for c in _COORDS]
    mag = sp.sqrt(g[0] ** 2 + g[1] ** 2 + g[2] ** 2)
    return [gi / mag for gi in g]


def shape_applied_field(surface, u):
    """``S(pi(u))`` extended off the surface via the level-set normal field,
    returned as an AnalyticField (so iterated curls of it are exact)."""
    n = normal_field_sympy(surface)
    un = sum(ue * ne for ue, ne in zip(u.exprs, n))
    piu = [ue - un * ne for ue, ne in zip(u.exprs, n)]
    comps = []
    for i in range(3):
        # S(v)_i = -sum_j dn_i/dx_j v_j
        comps.append(
            -sum(sp.diff(n[i], _COORDS[j]) * piu[j] for j in range(3))
        )
    return AnalyticField(
        [sp.together(c) for c in comps],
        label=f"S(pi({u.label}))",
        solenoidal=False,
    )
