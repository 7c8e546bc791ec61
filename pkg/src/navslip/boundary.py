"""Boundary-condition residual functionals on curved and flat walls.

Every condition is evaluated extrinsically (Cartesian components) at
boundary sample points; local frames are never used for computation, only
for display.  The residual conventions:

* kinematic:            ``u . n``
* classical slip form:  ``c = pi(u) + 2 zeta pi(Du n)``,
  ``Du = (grad u + grad u^T)/2``
* geometric (vorticity) form, curvature sign ``sigma``:
  ``g_sigma = pi(omega) + (1/zeta) R pi(u) - 2 sigma R S(pi(u))``
* slip-type:            ``omega x n``
* iterated order ``r``: ``pi(curl^{r+1} u) + (1/zeta) R pi(curl^r u)
  - 2 sigma R pi(curl^r S(pi(u)))``

with ``R(V) = n x V`` the in-plane quarter turn and ``S`` the shape
operator.

Sign of the curvature term
--------------------------
For any field tangent along the surface, the pointwise identities

    pi(2 Du n) = 2 S(u) + omega x n        and        omega x n = -R pi(omega)

give ``R(c)/zeta = g_sigma`` with ``sigma = -1``.  The package therefore
fixes ``CURVATURE_SIGN = -1``: with that choice the geometric residual is
exactly ``(1/zeta) R`` applied to the classical residual, so the two
formulations vanish together.  :func:`equivalence_check` re-derives this
empirically on any corpus of tangent fields and will refuse a corpus on
which neither sign works (which indicates a convention bug elsewhere).
On flat walls the curvature term vanishes and both signs coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BaseConditionViolated,
    NoConsistentSign,
    NonpositiveSlipLength,
    PreconditionViolated,
)
from .fields import iterated_curl, shape_applied_field
from .geometry import normal, normal_derivative

# Curvature-term sign validated by equivalence_check against the classical
# rate-of-strain form of the slip condition (see module docstring).
CURVATURE_SIGN = -1


@dataclass
class BCResidualReport:
    """Max/mean residual magnitudes of one boundary condition over samples."""

    condition: str
    max_residual: float
    mean_residual: float
    samples: int
    zeta: float | None = None
    sign_sigma: int | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        d = {
            "condition": self.condition,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "samples": self.samples,
        }
        if self.zeta is not None:
            d["zeta"] = self.zeta
        if self.sign_sigma is not None:
            d["sign_sigma"] = self.sign_sigma
        d.update(self.extra)
        return d


def default_samples(surface, n_u=32, n_v=64):
    pts, _ = surface.quadrature_nodes(n_u, n_v)
    return pts


def _report(condition, res_norms, **kw):
    res_norms = np.asarray(res_norms, dtype=float)
    return BCResidualReport(
        condition=condition,
        max_residual=float(res_norms.max()),
        mean_residual=float(res_norms.mean()),
        samples=int(res_norms.size),
        **kw,
    )


def _geometry_at(surface, pts):
    n = normal(surface, pts, check=False)
    dn = normal_derivative(surface, pts)
    return n, dn


def _project(vals, n):
    return vals - np.einsum("pi,pi->p", vals, n)[:, None] * n


def _rotate(vals, n):
    return np.cross(n, vals)


def kinematic_residual(u, surface, samples=None):
    """Impermeability residual ``max |u . n|``."""
    pts = default_samples(surface) if samples is None else np.atleast_2d(samples)
    surface.require_on_surface(pts)
    n = normal(surface, pts, check=False)
    vals = np.atleast_2d(u.value(pts))
    return _report("kinematic", np.abs(np.einsum("pi,pi->p", vals, n)))


def classical_residual_vectors(u, surface, zeta, pts):
    n, _ = _geometry_at(surface, pts)
    vals = np.atleast_2d(u.value(pts))
    jac = u.jacobian(pts)
    du_n = 0.5 * (
        np.einsum("pij,pj->pi", jac, n) + np.einsum("pji,pj->pi", jac, n)
    )
    return _project(vals, n) + 2.0 * zeta * _project(du_n, n)


def navier_classical_residual(u, surface, zeta, samples=None):
    """Classical slip condition via the rate-of-strain tensor."""
    if zeta <= 0:
        raise NonpositiveSlipLength(f"zeta = {zeta}")
    pts = default_samples(surface) if samples is None else np.atleast_2d(samples)
    surface.require_on_surface(pts)
    c = classical_residual_vectors(u, surface, zeta, pts)
    return _report(
        "navier_classical", np.linalg.norm(c, axis=-1), zeta=float(zeta)
    )


def geometric_residual_vectors(u, surface, zeta, sigma, pts):
    n, dn = _geometry_at(surface, pts)
    vals = np.atleast_2d(u.value(pts))
    omega = np.atleast_2d(u.curl().value(pts))
    piu = _project(vals, n)
    s_piu = -np.einsum("pij,pj->pi", dn, piu)
    return (
        _project(omega, n)
        + (1.0 / zeta) * _rotate(piu, n)
        - 2.0 * sigma * _rotate(s_piu, n)
    )


def navier_geometric_residual(u, surface, zeta, sigma=CURVATURE_SIGN, samples=None):
    """Vorticity (geometric) form of the slip condition."""
    if zeta <= 0:
        raise NonpositiveSlipLength(f"zeta = {zeta}")
    if sigma not in (-1, 1):
        raise ValueError("sigma must be +1 or -1")
    pts = default_samples(surface) if samples is None else np.atleast_2d(samples)
    surface.require_on_surface(pts)
    g = geometric_residual_vectors(u, surface, zeta, sigma, pts)
    return _report(
        "navier_geometric",
        np.linalg.norm(g, axis=-1),
        zeta=float(zeta),
        sign_sigma=int(sigma),
    )


def slip_type_residual(u, surface, samples=None):
    """Residual of the vorticity-alignment condition ``omega x n = 0``."""
    pts = default_samples(surface) if samples is None else np.atleast_2d(samples)
    surface.require_on_surface(pts)
    n = normal(surface, pts, check=False)
    omega = np.atleast_2d(u.curl().value(pts))
    return _report("slip_type", np.linalg.norm(np.cross(omega, n), axis=-1))


def equivalence_check(surface, zeta, corpus, samples=None, kinematic_tol=1e-10,
                      match_tol=1e-8):
    """Find the curvature sign making the two slip formulations agree.

    For each ``sigma`` the deviation ``max |g_sigma - (1/zeta) R c|`` is
    taken over the corpus and samples.  Returns ``(sigma_star,
    max_deviation)`` for the winning sign.  On flat walls both signs tie
    (the curvature term is identically zero); the validated module constant
    breaks the tie.  Raises NoConsistentSign if neither sign matches, and
    PreconditionViolated if a corpus member is not tangent.
    """
    if zeta <= 0:
        raise NonpositiveSlipLength(f"zeta = {zeta}")
    pts = default_samples(surface) if samples is None else np.atleast_2d(samples)
    surface.require_on_surface(pts)
    n, _ = _geometry_at(surface, pts)

    bad = []
    for u in corpus:
        vals = np.atleast_2d(u.value(pts))
        kin = np.abs(np.einsum("pi,pi->p", vals, n)).max()
        if kin >= kinematic_tol:
            bad.append(f"{u.label}: kinematic residual {kin:.3e}")
    if bad:
        raise PreconditionViolated(bad)

    deviations = {}
    for sigma in (+1, -1):
        worst = 0.0
        for u in corpus:
            c = classical_residual_vectors(u, surface, zeta, pts)
            g = geometric_residual_vectors(u, surface, zeta, sigma, pts)
            dev = np.linalg.norm(g - _rotate(c, n) / zeta, axis=-1).max()
            worst = max(worst, float(dev))
        deviations[sigma] = worst

    passing = [s for s, d in deviations.items() if d < match_tol]
    if not passing:
        raise NoConsistentSign(
            f"neither sign matches: +1 -> {deviations[+1]:.3e}, "
            f"-1 -> {deviations[-1]:.3e}"
        )
    if len(passing) == 2:
        sigma_star = CURVATURE_SIGN  # flat wall: degenerate, use convention
    else:
        sigma_star = passing[0]
    return sigma_star, deviations[sigma_star]


def iterated_navier_residual(u, surface, zeta, r, sigma=CURVATURE_SIGN,
                             samples=None, base_tol=1e-8):
    """Order-``r`` slip condition on the iterated curls of ``u``.

    Requires the order-0 geometric condition to hold first (raises
    BaseConditionViolated otherwise).  The curvature term extends
    ``S(pi(u))`` off the surface through the level-set normal field before
    taking its iterated curl.
    """
    if zeta <= 0:
        raise NonpositiveSlipLength(f"zeta = {zeta}")
    pts = default_samples(surface) if samples is None else np.atleast_2d(samples)
    surface.require_on_surface(pts)

    base = navier_geometric_residual(u, surface, zeta, sigma, samples=pts)
    if base.max_residual >= base_tol:
        raise BaseConditionViolated(
            f"order-0 residual {base.max_residual:.3e} >= {base_tol:.1e}"
        )

    n, _ = _geometry_at(surface, pts)
    cr = np.atleast_2d(iterated_curl(u, r).value(pts))
    cr1 = np.atleast_2d(iterated_curl(u, r + 1).value(pts))
    s_field = shape_applied_field(surface, u)
    cr_s = np.atleast_2d(iterated_curl(s_field, r).value(pts))
    res = (
        _project(cr1, n)
        + (1.0 / zeta) * _rotate(_project(cr, n), n)
        - 2.0 * sigma * _rotate(_project(cr_s, n), n)
    )
    return _report(
        f"iterated_navier(r={r})",
        np.linalg.norm(res, axis=-1),
        zeta=float(zeta),
        sign_sigma=int(sigma),
        extra={"order": r, "base_max_residual": base.max_residual},
    )


def commutation_identity_residual(v, surface, samples=None):
    """Check ``pi(curl(R pi(V))) == R pi(curl V)`` at boundary samples.

    The identity holds for fields whose wall-normal component vanishes
    identically near the surface, e.g. channel fields with ``V3 == 0``.
    """
    pts = default_samples(surface) if samples is None else np.atleast_2d(samples)
    surface.require_on_surface(pts)
    n, _ = _geometry_at(surface, pts)

    # lhs needs curl of the rotated-projected field as an analytic field
    from .fields import AnalyticField, normal_field_sympy

    ns = normal_field_sympy(surface)
    vn = sum(ve * ne for ve, ne in zip(v.exprs, ns))
    piv = [ve - vn * ne for ve, ne in zip(v.exprs, ns)]
    rot = [
        ns[1] * piv[2] - ns[2] * piv[1],
        ns[2] * piv[0] - ns[0] * piv[2],
        ns[0] * piv[1] - ns[1] * piv[0],
    ]
    lhs_field = AnalyticField(rot, label="R(pi(V))", solenoidal=False).curl()
    lhs = _project(np.atleast_2d(lhs_field.value(pts)), n)
    rhs = _rotate(_project(np.atleast_2d(v.curl().value(pts)), n), n)
    return _report("commutation", np.linalg.norm(lhs - rhs, axis=-1))
