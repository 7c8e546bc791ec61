"""Quadrature verification of the integral and bracket identities.

The checks here are the package's ground truth for sign conventions: the
div-curl base identity balances only when the boundary term uses
``II = -grad(n)`` with the outward normal, and the persistence criterion
reproduces closed-form Lie brackets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionViolated
from .fields import iterated_curl
from .geometry import normal, normal_derivative

REL_FLOOR = 1e-300


@dataclass
class IdentityReport:
    name: str
    lhs: float
    rhs: float
    abs_residual: float
    rel_residual: float
    resolution: str
    details: dict = field(default_factory=dict)

    def as_dict(self):
        d = {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_residual": self.abs_residual,
            "rel_residual": self.rel_residual,
            "resolution": self.resolution,
        }
        d.update(self.details)
        return d


def _make_report(name, lhs, rhs, resolution, details=None):
    absres = abs(lhs - rhs)
    rel = absres / max(abs(lhs), abs(rhs), REL_FLOOR)
    return IdentityReport(
        name=name,
        lhs=float(lhs),
        rhs=float(rhs),
        abs_residual=float(absres),
        rel_residual=float(rel),
        resolution=resolution,
        details=details or {},
    )


def _volume_integral(domain, f):
    pts, w = domain.volume_nodes()
    return float(np.sum(w * np.asarray(f(pts), dtype=float)))


def _boundary_integral(domain, f, n_u=64, n_v=128):
    pts, w = domain.boundary_nodes(n_u, n_v)
    n = domain.boundary_normals(pts)
    return float(np.sum(w * np.asarray(f(pts, n), dtype=float)))


def _check_divfree_tangent(u, domain, tol=1e-10):
    violations = []
    pts, _ = domain.volume_nodes()
    div_max = np.abs(
        np.trace(u.jacobian(pts), axis1=-2, axis2=-1)
    ).max()
    if div_max >= tol:
        violations.append(f"divergence max {div_max:.3e} >= {tol:.1e}")
    bpts, _ = domain.boundary_nodes(32, 64)
    n = domain.boundary_normals(bpts)
    kin = np.abs(np.einsum("pi,pi->p", np.atleast_2d(u.value(bpts)), n)).max()
    if kin >= tol:
        violations.append(f"boundary u.n max {kin:.3e} >= {tol:.1e}")
    return violations


def grad_sq_integrand(u):
    def f(pts):
        jac = u.jacobian(pts)
        return np.sum(jac * jac, axis=(-2, -1))

    return f


def divcurl_base_check(u, domain, n_u=64, n_v=128):
    """Check ``|grad u|^2_{L2} = |curl u|^2_{L2} + int_bdry II(u, u)`` for a
    divergence-free field tangent to the boundary."""
    violations = _check_divfree_tangent(u, domain)
    if violations:
        raise PreconditionViolated(violations)

    grad_sq = _volume_integral(domain, grad_sq_integrand(u))
    cu = u.curl()
    curl_sq = _volume_integral(
        domain, lambda pts: np.sum(np.atleast_2d(cu.value(pts)) ** 2, axis=-1)
    )

    surface = getattr(domain, "surface", None)

    def ii_uu(pts, n):
        vals = np.atleast_2d(u.value(pts))
        if surface is not None:
            dn = normal_derivative(surface, pts)
            s_u = -np.einsum("pij,pj->pi", dn, vals)
            return np.einsum("pi,pi->p", s_u, vals)
        # flat walls: II == 0
        return np.zeros(pts.shape[0])

    boundary_term = _boundary_integral(domain, ii_uu, n_u, n_v)
    return _make_report(
        "divcurl_base",
        grad_sq,
        curl_sq + boundary_term,
        f"{domain.resolution} / bdry {n_u}x{n_v}",
        details={
            "grad_sq": grad_sq,
            "curl_sq": curl_sq,
            "boundary_term": boundary_term,
        },
    )


def grad_power_norm_sq(u, domain, order):
    """``int |grad^order u|^2`` summed over all index tuples (full derivative
    tensor with multiplicity, the convention of the norm-equivalence bound)."""

    def f(pts):
        t = u.derivative_tensor(order, pts)
        return np.sum(t * t, axis=tuple(range(1, t.ndim)))

    return _volume_integral(domain, f)


def curl_norms_sq(u, domain, up_to):
    """List of ``|curl^l u|^2_{L2}`` for ``l = 0 .. up_to``."""
    out = []
    for l in range(up_to + 1):
        cl = iterated_curl(u, l)
        out.append(
            _volume_integral(
                domain,
                lambda pts, cl=cl: np.sum(np.atleast_2d(cl.value(pts)) ** 2, axis=-1),
            )
        )
    return out


def divcurl_ratio(u, domain, r, zeta=None, sigma=None, check_bc=True,
                  bc_tol=1e-8):
    """Ratio ``rho = |grad^{r+1} u|^2 / sum_{l<=r+1} |curl^l u|^2``.

    The norm-equivalence bound states ``rho <= M`` for divergence-free
    fields satisfying the impermeability and slip conditions; the corpus
    maximum of ``rho`` is an empirical lower bound for ``M``.  Pass
    ``zeta`` to enforce the slip condition as a precondition (``check_bc``
    can disable enforcement for exploratory fields).  The zero field
    returns ``rho = 0`` by convention.
    """
    violations = _check_divfree_tangent(u, domain)
    if check_bc and zeta is not None:
        from .boundary import CURVATURE_SIGN, navier_geometric_residual

        sig = CURVATURE_SIGN if sigma is None else sigma
        walls = getattr(domain, "walls", None)
        surfaces = walls if walls is not None else (domain.surface,)
        for srf in surfaces:
            rep = navier_geometric_residual(u, srf, zeta, sig)
            if rep.max_residual >= bc_tol:
                violations.append(
                    f"slip residual {rep.max_residual:.3e} >= {bc_tol:.1e} on {srf.kind}"
                )
    if violations:
        raise PreconditionViolated(violations)

    num = grad_power_norm_sq(u, domain, r + 1)
    curls = curl_norms_sq(u, domain, r + 1)
    den = sum(curls)
    rho = 0.0 if den == 0.0 else num / den
    return _make_report(
        f"divcurl_ratio(r={r})",
        num,
        den,
        domain.resolution,
        details={"rho": rho, "curl_norms_sq": curls},
    )


def vector_identity_checks(u, w, domain, n_u=64, n_v=128):
    """Two generic identities: the pointwise rotational decomposition
    ``u.grad u = grad(|u|^2)/2 - u x omega`` and the curl
    integration-by-parts formula
    ``int <V, curl W> = int_bdry <W x V, n> + int <curl V, W>``."""
    pts, _ = domain.volume_nodes()
    vals = np.atleast_2d(u.value(pts))
    jac = u.jacobian(pts)
    adv = np.einsum("pij,pj->pi", jac, vals)
    grad_half = np.einsum("pji,pj->pi", jac, vals)
    omega = np.atleast_2d(u.curl().value(pts))
    rhs = grad_half - np.cross(vals, omega)
    pointwise = _make_report(
        "advection_decomposition",
        float(np.abs(adv).max()),
        float(np.abs(rhs).max()),
        domain.resolution,
        details={"max_pointwise_residual": float(np.abs(adv - rhs).max())},
    )
    # report residual as the pointwise deviation, not the norms difference
    pointwise.abs_residual = pointwise.details["max_pointwise_residual"]
    pointwise.rel_residual = pointwise.abs_residual / max(
        pointwise.lhs, pointwise.rhs, REL_FLOOR
    )

    cw = w.curl()
    cu = u.curl()
    lhs = _volume_integral(
        domain,
        lambda p: np.einsum(
            "pi,pi->p", np.atleast_2d(u.value(p)), np.atleast_2d(cw.value(p))
        ),
    )
    vol = _volume_integral(
        domain,
        lambda p: np.einsum(
            "pi,pi->p", np.atleast_2d(cu.value(p)), np.atleast_2d(w.value(p))
        ),
    )
    bdry = _boundary_integral(
        domain,
        lambda p, n: np.einsum(
            "pi,pi->p",
            np.cross(np.atleast_2d(w.value(p)), np.atleast_2d(u.value(p))),
            n,
        ),
        n_u,
        n_v,
    )
    by_parts = _make_report(
        "curl_by_parts",
        lhs,
        bdry + vol,
        f"{domain.resolution} / bdry {n_u}x{n_v}",
        details={"boundary_term": bdry, "volume_term": vol},
    )
    return [pointwise, by_parts]


# -- persistence of the vorticity-alignment condition ---------------------------


@dataclass
class PersistenceVerdict:
    admissibility: dict
    bracket: np.ndarray
    bracket_cross_n_norm: float
    gauss_curvature_at_x0: float
    vorticity_norm_at_x0: float
    verdict: str
    bracket_tol: float

    def as_dict(self):
        return {
            "admissibility": dict(self.admissibility),
            "bracket": [float(b) for b in self.bracket],
            "bracket_cross_n_norm": self.bracket_cross_n_norm,
            "gauss_curvature_at_x0": self.gauss_curvature_at_x0,
            "vorticity_norm_at_x0": self.vorticity_norm_at_x0,
            "verdict": self.verdict,
            "bracket_tol": self.bracket_tol,
        }


def lie_bracket(u, w, pts):
    """``[u, w] = (u . grad) w - (w . grad) u`` from exact jacobians."""
    pts2 = np.atleast_2d(np.asarray(pts, dtype=float))
    uv = np.atleast_2d(u.value(pts2))
    wv = np.atleast_2d(w.value(pts2))
    ju = u.jacobian(pts2)
    jw = w.jacobian(pts2)
    out = np.einsum("pij,pj->pi", jw, uv) - np.einsum("pij,pj->pi", ju, wv)
    return out[0] if np.asarray(pts).ndim == 1 else out


def persistence_check(u0, omega0, surface, x0, bracket_tol=1e-10,
                      samples=None):
    """Evaluate the geometric failure criterion for the vorticity-alignment
    condition at a boundary point ``x0``.

    The verdict is ``PredictsFailure`` when the bracket ``[u0, omega0]``
    has a nonzero component against the boundary (``|b x n| > tol``) at a
    point of nonzero Gauss curvature with nonzero vorticity; otherwise
    ``Inconclusive``.  Admissibility residuals (``div u0``, ``u0 . n``,
    ``omega0 x n`` over the surface) are reported but do not gate the
    verdict.
    """
    from .geometry import curvatures

    x0 = np.asarray(x0, dtype=float)
    surface.require_on_surface(x0)

    pts = (
        surface.quadrature_nodes(32, 64)[0] if samples is None
        else np.atleast_2d(samples)
    )
    n = normal(surface, pts, check=False)
    div_max = float(
        np.abs(np.trace(u0.jacobian(pts), axis1=-2, axis2=-1)).max()
    )
    un_max = float(
        np.abs(np.einsum("pi,pi->p", np.atleast_2d(u0.value(pts)), n)).max()
    )
    wxn_max = float(
        np.linalg.norm(
            np.cross(np.atleast_2d(omega0.value(pts)), n), axis=-1
        ).max()
    )

    b = lie_bracket(u0, omega0, x0)
    n0 = normal(surface, x0)
    bxn = float(np.linalg.norm(np.cross(b, n0)))
    K, _ = curvatures(surface, x0)
    w_norm = float(np.linalg.norm(omega0.value(x0)))

    failure = bxn > bracket_tol and abs(K) > 1e-12 and w_norm > 1e-12
    return PersistenceVerdict(
        admissibility={
            "div_u0": div_max,
            "u0_dot_n": un_max,
            "omega0_cross_n": wxn_max,
        },
        bracket=np.asarray(b, dtype=float),
        bracket_cross_n_norm=bxn,
        gauss_curvature_at_x0=float(K),
        vorticity_norm_at_x0=w_norm,
        verdict="PredictsFailure" if failure else "Inconclusive",
        bracket_tol=bracket_tol,
    )
