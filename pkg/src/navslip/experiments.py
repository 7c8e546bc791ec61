"""Vanishing-viscosity campaign: matched viscous/inviscid runs over a
viscosity ladder, error norms in time, and log-log rate fits.

One inviscid reference run is integrated once per campaign; every ladder
entry restarts from the identical initial state and is compared against
the reference snapshot-by-snapshot in the discrete H^r norms.  The fitted
slope of ``sup_t error`` against viscosity is the campaign's headline
number; the gradient-uniformity probe decides which rate regime (cube-root
or square-root) that slope should be read against.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ConfigInvalid,
    LadderRunFailed,
    NavslipError,
    NonpositiveValue,
    TooFewPoints,
)
from .solver import SimConfig, run
from .spectral import gradient, l2_norm_sq, derivative_coeffs, SpectralField


@dataclass
class CampaignSpec:
    """Shared run description plus the viscosity ladder."""

    base: SimConfig
    nu_ladder: tuple = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4)
    zeta: float = 1.0
    error_orders: tuple = (2,)

    def validate(self):
        lad = tuple(self.nu_ladder)
        if len(lad) < 3:
            raise ConfigInvalid("nu_ladder needs at least 3 entries")
        if any(nu <= 0 for nu in lad):
            raise ConfigInvalid("nu_ladder entries must be positive")
        if any(b >= a for a, b in zip(lad, lad[1:])):
            raise ConfigInvalid("nu_ladder must be strictly decreasing")
        if not (self.zeta > 0 or np.isinf(self.zeta)):
            raise ConfigInvalid("zeta must be positive")
        if not self.error_orders:
            raise ConfigInvalid("need at least one error order")


@dataclass
class RateFit:
    """Least-squares power law through ``(nu, sup_t err)`` points."""

    points: list
    slope: float
    intercept: float
    residual: float
    meets_cuberoot_bound: bool
    consistent_with_sqrt: bool

    def as_dict(self):
        return {
            "points": [[float(a), float(b)] for a, b in self.points],
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "meets_cuberoot_bound": self.meets_cuberoot_bound,
            "consistent_with_sqrt": self.consistent_with_sqrt,
        }


CUBEROOT_FLOOR = 1.0 / 3.0 - 0.02
SQRT_FLOOR = 0.5 - 0.05


def fit_rate(points):
    """Fit ``err = C nu^slope`` by least squares in log-log; exact on
    perfect power laws."""
    pts = [(float(nu), float(err)) for nu, err in points]
    if len(pts) < 3:
        raise TooFewPoints(f"need >= 3 points, got {len(pts)}")
    if any(nu <= 0 or err <= 0 for nu, err in pts):
        raise NonpositiveValue("rate fit needs positive nu and err")
    ln = np.log([p[0] for p in pts])
    le = np.log([p[1] for p in pts])
    A = np.vstack([ln, np.ones_like(ln)]).T
    (slope, intercept), res, *_ = np.linalg.lstsq(A, le, rcond=None)
    residual = float(np.sqrt(res[0])) if len(res) else 0.0
    return RateFit(
        points=pts,
        slope=float(slope),
        intercept=float(intercept),
        residual=residual,
        meets_cuberoot_bound=bool(slope >= CUBEROOT_FLOOR),
        consistent_with_sqrt=bool(slope >= SQRT_FLOOR),
    )


@dataclass
class CampaignResult:
    spec: CampaignSpec
    rows: list            # (nu, t, {order: err}, grad_inf)
    sup_errors: dict      # order -> [(nu, sup_t err)]
    hr1_time_integral: dict  # nu -> int_0^T |v|^2_{H^{r+1}} dt
    fits: dict            # order -> RateFit
    nu_star: float | None
    failures: list        # (nu, message)
    monotone: dict        # order -> bool (5% slack)
    gradient_probe: dict

    def raw_table(self):
        """Rows for raw.csv: nu, t, err per requested order, grad_inf."""
        orders = sorted(self.spec.error_orders)
        header = ["nu", "t"] + [f"err_H{r}" for r in orders] + ["grad_inf"]
        out = []
        for nu, t, errs, ginf in self.rows:
            out.append([nu, t] + [errs[r] for r in orders] + [ginf])
        return header, out


def _grad_inf_diff(u, ref):
    diff = SpectralField(u.coeffs - ref.coeffs, u.spec, True)
    g = gradient(diff)
    zb_vals = _tensor_grid(diff, g)
    return float(np.abs(zb_vals).max())


def _tensor_grid(field, coeffs):
    from .spectral import z_basis

    zb = z_basis(field.spec, field.shape[2])
    vals = zb.synthesis(coeffs, axis=-1)
    return np.fft.ifft2(vals, axes=(-3, -2), norm="forward").real


def _hr_error_sq(u, ref, r):
    diff = SpectralField(u.coeffs - ref.coeffs, u.spec, True)
    total = 0.0
    for l in range(r + 1):
        for alpha in _multi_indices(l):
            total += l2_norm_sq(diff, derivative_coeffs(diff, alpha))
    return total


def _multi_indices(total):
    for a1 in range(total + 1):
        for a2 in range(total - a1 + 1):
            yield (a1, a2, total - a1 - a2)


def inviscid_limit_campaign(spec: CampaignSpec, progress=None):
    """Run the ladder against one inviscid reference; returns CampaignResult.

    Ladder entries that fail keep the campaign going (the failure is
    recorded); the fit still requires three survivors.  ``nu_star`` is the
    largest viscosity that completed.
    """
    spec.validate()
    say = progress or (lambda msg: None)

    euler_cfg = replace(spec.base, nu=0.0, zeta=spec.zeta)
    say(f"reference run (nu = 0), T = {euler_cfg.T:g}")
    ref_snaps, _ = run(euler_cfg, keep_snapshots=True)
    ref_times = np.array([t for t, _ in ref_snaps])

    orders = sorted(spec.error_orders)
    r_int = max(orders) + 1
    rows = []
    sup_errors = {r: [] for r in orders}
    hr1_int = {}
    failures = []

    for nu in spec.nu_ladder:
        cfg = replace(spec.base, nu=float(nu), zeta=spec.zeta)
        say(f"ladder run nu = {nu:g}")
        try:
            snaps, _ = run(cfg, keep_snapshots=True)
        except NavslipError as exc:
            failures.append(LadderRunFailed(float(nu), str(exc)))
            say(f"  failed: {exc}")
            continue
        if len(snaps) != len(ref_snaps):
            failures.append(
                LadderRunFailed(float(nu), "save-point mismatch with reference")
            )
            continue
        sups = {r: 0.0 for r in orders}
        hr1_series = []
        for (t, u), (t_ref, u_ref) in zip(snaps, ref_snaps):
            errs = {r: float(np.sqrt(_hr_error_sq(u, u_ref, r))) for r in orders}
            ginf = _grad_inf_diff(u, u_ref)
            rows.append((float(nu), float(t), errs, ginf))
            for r in orders:
                sups[r] = max(sups[r], errs[r])
            hr1_series.append(_hr_error_sq(u, u_ref, r_int))
        for r in orders:
            sup_errors[r].append((float(nu), sups[r]))
        hr1_int[float(nu)] = float(
            np.trapezoid(hr1_series, ref_times)
            if hasattr(np, "trapezoid")
            else np.trapz(hr1_series, ref_times)
        )

    completed = {r: pts for r, pts in sup_errors.items()}
    fits = {}
    for r, pts in completed.items():
        if len(pts) >= 3:
            fits[r] = fit_rate(pts)

    monotone = {}
    for r, pts in completed.items():
        errs = [e for _, e in pts]  # ladder is descending in nu
        monotone[r] = all(b <= a * 1.05 for a, b in zip(errs, errs[1:]))

    nu_star = max((nu for nu, _ in completed[orders[0]]), default=None)
    probe = gradient_uniformity_probe(rows, spec.nu_ladder)

    return CampaignResult(
        spec=spec,
        rows=rows,
        sup_errors=sup_errors,
        hr1_time_integral=hr1_int,
        fits=fits,
        nu_star=nu_star,
        failures=failures,
        monotone=monotone,
        gradient_probe=probe,
    )


def gradient_uniformity_probe(rows, nu_ladder):
    """Tabulate ``max_t |grad u^nu - grad u|_inf`` per viscosity and flag
    whether it is nu-uniform: the max over the two smallest viscosities
    within twice the max over the two largest."""
    per_nu = {}
    for nu, _t, _errs, ginf in rows:
        per_nu[nu] = max(per_nu.get(nu, 0.0), ginf)
    nus_done = [nu for nu in nu_ladder if nu in per_nu]
    if len(nus_done) < 4:
        uniform = True if per_nu else False
        return {"per_nu": per_nu, "uniform": uniform}
    largest = max(per_nu[nu] for nu in nus_done[:2])
    smallest = max(per_nu[nu] for nu in nus_done[-2:])
    uniform = smallest <= 2.0 * largest or smallest < 1e-14
    return {
        "per_nu": per_nu,
        "uniform": bool(uniform),
        "max_over_largest_two": largest,
        "max_over_smallest_two": smallest,
    }
