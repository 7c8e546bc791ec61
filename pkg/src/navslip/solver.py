"""Pseudo-spectral time integration on the periodic channel.

Momentum equation in rotational form, with the pressure absorbed by the
divergence-free projection ``P``:

    du/dt = nu Lap(u) + P(u x omega),

advanced by a CNAB2 IMEX scheme: Adams-Bashforth 2 for the projected,
dealiased nonlinear term and Crank-Nicolson for the diffusion, solved per
Fourier mode as a dense Chebyshev tau system with slip (Robin) conditions
``dz u_h = -+ u_h / zeta`` at ``z = +-1`` on the horizontal components and
``u_z = 0`` at the walls.  A projection after the implicit solve restores
discrete incompressibility (splitting error O(dt^2), consistent with the
scheme order).  Inviscid runs (``nu = 0``) skip the implicit solve and
keep only impermeability, which the projection enforces.

With flat walls the curvature term of the slip condition vanishes, and the
discrete energy identity integrates to

    E0(t) + int_0^t [ 2 nu |grad u|^2 + (2 nu / zeta) int_walls |u|^2 ] = E0(0),

which :func:`energy_balance_check` verifies from the recorded monitors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (
    CFLViolated,
    ConfigInvalid,
    NaNDetected,
    ParameterDomainError,
    SeriesTooShort,
)
from . import fields as afields
from . import spectral as sp_ops
from .spectral import (
    ChannelSpec,
    LerayProjector,
    SpectralField,
    TauSolver,
    apply_dealias,
    curl,
    derivative_coeffs,
    divergence_linf,
    iterated_curl,
    l2_norm_sq,
    wall_integral_sq,
    wall_values,
    wavenumbers,
    z_basis,
)


@dataclass
class SimConfig:
    """Full description of one run.

    ``resolution`` is (Nx, Ny, Nz); odd Nz keeps the Chebyshev grid
    symmetric about the midplane.  ``zeta = inf`` selects free-slip walls;
    ``zeta`` is ignored entirely for inviscid runs.
    """

    nu: float
    zeta: float = 1.0
    resolution: tuple = (32, 32, 65)
    dt: float = 1e-3
    T: float = 0.5
    r: int = 2
    save_every: int = 10
    initial: object = "taylor_green"  # catalog name or AnalyticField
    initial_params: dict = dc_field(default_factory=dict)
    amplitude: float = 1.0
    normalize_Er: bool = False
    spec: ChannelSpec = dc_field(default_factory=ChannelSpec)
    cfl_number: float = 2.0

    def validate(self):
        if self.nu < 0:
            raise ConfigInvalid("nu must be >= 0")
        if self.nu > 0 and not (self.zeta > 0 or math.isinf(self.zeta)):
            raise ConfigInvalid("zeta must be > 0 (or inf for free slip)")
        if self.dt <= 0:
            raise ConfigInvalid("dt must be > 0")
        if self.T < 0:
            raise ConfigInvalid("T must be >= 0")
        Nx, Ny, Nz = self.resolution
        if min(Nx, Ny) < 4 or Nz < 5:
            raise ConfigInvalid(f"resolution {self.resolution} too small")
        if self.save_every < 1:
            raise ConfigInvalid("save_every must be >= 1")
        if self.r < 0:
            raise ConfigInvalid("diagnostic order r must be >= 0")

    def initial_field(self):
        if isinstance(self.initial, str):
            return afields.catalog_field(self.initial, **self.initial_params)
        return self.initial


@dataclass
class SolverState:
    t: float
    u: SpectralField
    p: np.ndarray | None
    step_count: int


@dataclass
class EnergyReport:
    """Time series of the energy monitors at the save points."""

    t: np.ndarray
    E0: np.ndarray
    diss: np.ndarray
    wall: np.ndarray
    Er: np.ndarray
    balance_residual: np.ndarray
    nu: float
    zeta: float
    r: int
    dt: float

    HEADER = ("t", "E0", "diss", "wall", "Er", "balance_residual")

    def rows(self):
        return list(
            zip(self.t, self.E0, self.diss, self.wall, self.Er,
                self.balance_residual)
        )


def _min_spacing(config):
    Nx, Ny, Nz = config.resolution
    spec = config.spec
    dz = spec.Lz / Nz if spec.z_periodic else 2.0 / (Nz - 1)
    return min(spec.Lx / Nx, spec.Ly / Ny, dz)


class NSSolver:
    """Owns the factored wall solves and the projector for one resolution."""

    def __init__(self, config: SimConfig):
        config.validate()
        self.config = config
        self.spec = config.spec
        Nx, Ny, Nz = config.resolution
        self.shape = (Nx, Ny, Nz)
        self.projector = LerayProjector(self.spec, self.shape)
        self.nu = config.nu
        self.zeta = config.zeta
        self.dt = config.dt
        self._kx = wavenumbers(Nx, self.spec.Lx)[:, None, None]
        self._ky = wavenumbers(Ny, self.spec.Ly)[None, :, None]
        self._k2h = self._kx**2 + self._ky**2
        if self.spec.z_periodic:
            kz = wavenumbers(Nz, self.spec.Lz)[None, None, :]
            self._k2_full = self._k2h + kz**2
        elif self.nu > 0:
            gamma = 0.5 * self.nu * self.dt
            izeta = 0.0 if math.isinf(self.zeta) else 1.0 / self.zeta
            tau = TauSolver(Nx, Ny, Nz, self.spec.Lx, self.spec.Ly)
            zb = tau.zb
            robin = [
                zb.deriv_row(+1) + izeta * zb.value_row(+1),
                zb.deriv_row(-1) - izeta * zb.value_row(-1),
            ]
            dirichlet = [zb.value_row(+1), zb.value_row(-1)]
            tau.factor(
                "diff_h",
                c_ident_fn=lambda k2: 1.0 + gamma * k2,
                c_d2_fn=lambda k2: -gamma,
                bc_rows=robin,
            )
            tau.factor(
                "diff_z",
                c_ident_fn=lambda k2: 1.0 + gamma * k2,
                c_d2_fn=lambda k2: -gamma,
                bc_rows=dirichlet,
            )
            self.tau = tau

    # -- pieces ----------------------------------------------------------------

    def nonlinear(self, u: SpectralField) -> SpectralField:
        """Projected, dealiased rotational term ``P(u x omega)``."""
        ug = u.grid()
        wg = curl(u).grid()
        cross = np.cross(ug, wg, axis=0)
        n = SpectralField.from_grid(cross, self.spec)
        return self.projector.project(apply_dealias(n))

    def _laplacian(self, coeffs):
        if self.spec.z_periodic:
            return -self._k2_full[None] * coeffs
        zb = z_basis(self.spec, self.shape[2])
        return zb.deriv(zb.deriv(coeffs, axis=-1), axis=-1) - self._k2h[None] * coeffs

    def diffuse(self, rhs_coeffs):
        """Crank-Nicolson implicit half: solve (I - gamma Lap) u = rhs with
        the wall conditions."""
        if self.spec.z_periodic:
            gamma = 0.5 * self.nu * self.dt
            return rhs_coeffs / (1.0 + gamma * self._k2_full[None])
        out = np.empty_like(rhs_coeffs)
        out[0] = self.tau.solve("diff_h", rhs_coeffs[0])
        out[1] = self.tau.solve("diff_h", rhs_coeffs[1])
        out[2] = self.tau.solve("diff_z", rhs_coeffs[2])
        return out

    def step(self, state: SolverState, n_prev: SpectralField | None = None):
        """Advance one CNAB2 step; returns (new_state, nonlinear term used)."""
        u = state.u
        n_cur = self.nonlinear(u)
        if n_prev is None:
            n_expl = n_cur.coeffs
        else:
            n_expl = 1.5 * n_cur.coeffs - 0.5 * n_prev.coeffs

        if self.nu > 0:
            gamma = 0.5 * self.nu * self.dt
            rhs = u.coeffs + gamma * self._laplacian(u.coeffs) + self.dt * n_expl
            star = SpectralField(self.diffuse(rhs), self.spec, u.dealiased)
            if not self.spec.z_periodic:
                # the tau rows carry no Poisson dynamics; clearing them ahead
                # of the projection stops a secular divergence residual from
                # accumulating in the top Chebyshev modes
                star.coeffs[..., -2:] = 0.0
        else:
            star = SpectralField(u.coeffs + self.dt * n_expl, self.spec,
                                 u.dealiased)
        unew, phi = self.projector.project(star, return_potential=True)
        if not np.all(np.isfinite(unew.coeffs)):
            raise NaNDetected(state.step_count + 1)
        new_state = SolverState(
            t=state.t + self.dt,
            u=unew,
            p=phi / self.dt,  # effective pressure over the step
            step_count=state.step_count + 1,
        )
        return new_state, n_cur


def init_state(config: SimConfig):
    """Sample, dealias, and project the initial field; verify the wall and
    divergence residuals; returns (state, diagnostics dict)."""
    config.validate()
    fld = config.initial_field()
    u = SpectralField.from_analytic(fld, config.spec, config.resolution)
    if config.amplitude != 1.0:
        u = u * config.amplitude
    u = apply_dealias(u)
    u = sp_ops.leray_project(u)
    if config.normalize_Er:
        er = l2_norm_sq(iterated_curl(u, config.r))
        if er > 0:
            u = u * (1.0 / math.sqrt(er))

    unorm = math.sqrt(l2_norm_sq(u))
    div_res = divergence_linf(u)
    diag = {
        "divergence_linf": div_res,
        "l2_norm": unorm,
    }
    if not config.spec.z_periodic:
        kin = max(
            float(np.abs(wall_values(u, +1)[2]).max()),
            float(np.abs(wall_values(u, -1)[2]).max()),
        )
        diag["kinematic_residual"] = kin
        if config.nu > 0:
            diag["navier_residual"] = _navier_wall_residual(u, config.zeta)
    if unorm > 0 and div_res > 1e-8 * max(unorm, 1.0):
        raise ConfigInvalid(
            f"initial divergence {div_res:.3e} too large for |u| = {unorm:.3e}"
        )

    max_speed = float(np.abs(u.grid()).max())
    h = _min_spacing(config)
    if max_speed > 0 and config.dt > config.cfl_number * h / max_speed:
        raise CFLViolated(
            f"dt = {config.dt:g} exceeds {config.cfl_number:g} * h/|u| = "
            f"{config.cfl_number * h / max_speed:g}"
        )
    diag["max_speed"] = max_speed
    return SolverState(t=0.0, u=u, p=None, step_count=0), diag


def _navier_wall_residual(u, zeta):
    """Max over both walls of |dz u_h +- u_h / zeta| (diagnostic only; the
    dynamics enforces the condition through the implicit solve)."""
    izeta = 0.0 if math.isinf(zeta) else 1.0 / zeta
    dz = SpectralField(sp_ops.deriv_z(u), u.spec, u.dealiased)
    worst = 0.0
    for sign in (+1, -1):
        uh = wall_values(u, sign)[:2]
        duh = wall_values(dz, sign)[:2]
        worst = max(worst, float(np.abs(duh + sign * izeta * uh).max()))
    return worst


def run(config: SimConfig, keep_snapshots=True):
    """Integrate to ``T``; returns (snapshots, EnergyReport).

    Snapshots are ``(t, SpectralField)`` pairs at the save points (always
    including t = 0 and the final time).  Monitors are sampled at save
    points and the balance integral accumulates by the trapezoid rule over
    those samples.
    """
    solver = NSSolver(config)
    state, _ = init_state(config)
    n_steps = int(round(config.T / config.dt))

    izeta = 0.0 if math.isinf(config.zeta) else 1.0 / config.zeta

    def monitors(u):
        e0 = l2_norm_sq(u)
        grad_sq = 0.0
        for alpha in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
            grad_sq += l2_norm_sq(u, derivative_coeffs(u, alpha))
        diss = 2.0 * config.nu * grad_sq
        if config.spec.z_periodic:
            wall = 0.0
        else:
            wall = (2.0 * config.nu * izeta) * (
                wall_integral_sq(u, +1) + wall_integral_sq(u, -1)
            )
        er = l2_norm_sq(iterated_curl(u, config.r))
        return e0, diss, wall, er

    ts, e0s, disss, walls, ers, residuals = [], [], [], [], [], []
    snapshots = []

    e0, diss, wall, er = monitors(state.u)
    E0_init = e0
    cum = 0.0
    last_rate = diss + wall
    last_t = 0.0
    ts.append(0.0)
    e0s.append(e0)
    disss.append(diss)
    walls.append(wall)
    ers.append(er)
    residuals.append(0.0)
    if keep_snapshots:
        snapshots.append((0.0, state.u.copy()))

    initial_speed = float(np.abs(state.u.grid()).max())
    n_prev = None
    for istep in range(1, n_steps + 1):
        state, n_prev = solver.step(state, n_prev)
        if istep % config.save_every == 0 or istep == n_steps:
            e0, diss, wall, er = monitors(state.u)
            rate = diss + wall
            cum += 0.5 * (state.t - last_t) * (rate + last_rate)
            last_rate, last_t = rate, state.t
            ts.append(state.t)
            e0s.append(e0)
            disss.append(diss)
            walls.append(wall)
            ers.append(er)
            residuals.append(e0 + cum - E0_init)
            if keep_snapshots:
                snapshots.append((state.t, state.u.copy()))
            speed = float(np.abs(state.u.grid()).max())
            if speed > 100.0 * (initial_speed + 1.0):
                raise CFLViolated(
                    f"speed grew to {speed:.3e} at t = {state.t:g}"
                )

    report = EnergyReport(
        t=np.array(ts),
        E0=np.array(e0s),
        diss=np.array(disss),
        wall=np.array(walls),
        Er=np.array(ers),
        balance_residual=np.array(residuals),
        nu=config.nu,
        zeta=config.zeta,
        r=config.r,
        dt=config.dt,
    )
    return snapshots, report


def energy_balance_check(report: EnergyReport):
    """Max |balance residual| normalised by the initial energy."""
    from .identities import _make_report

    e0 = report.E0[0] if report.E0[0] > 0 else 1.0
    worst = float(np.abs(report.balance_residual).max())
    return _make_report(
        "energy_balance",
        worst / e0,
        0.0,
        f"dt={report.dt:g}, saves={len(report.t)}",
        details={"max_abs_residual": worst, "E0_init": float(report.E0[0])},
    )


def tstar_estimate(E_r0, M, eta):
    """Guaranteed-lifespan estimate ``(1/M) log(1 + 1/(eta + E_r0))``;
    monotone decreasing in each argument."""
    if not (E_r0 >= 0):
        raise ParameterDomainError(f"E_r0 = {E_r0} must be >= 0")
    if not (M > 0):
        raise ParameterDomainError(f"M = {M} must be > 0")
    if not (eta > 0):
        raise ParameterDomainError(f"eta = {eta} must be > 0")
    return math.log(1.0 + 1.0 / (eta + E_r0)) / M


def differential_inequality_audit(report, window=None, M=None):
    """Audit ``Er' <= M (Er + Er^2)`` on a recorded energy series.

    ``report`` may be an EnergyReport or a ``(t, Er)`` pair of arrays.
    Returns ``(M_fit, violation_fraction)``: the smallest constant making
    the inequality hold at every interior point (finite differences), and
    the fraction of interior points violating it for the supplied ``M``
    (0.0 when ``M`` is None, i.e. checked against ``M_fit`` itself).
    """
    if isinstance(report, EnergyReport):
        t, er = report.t, report.Er
    else:
        t, er = np.asarray(report[0], float), np.asarray(report[1], float)
    if window is not None:
        lo, hi = window
        mask = (t >= lo) & (t <= hi)
        t, er = t[mask], er[mask]
    if len(t) < 3:
        raise SeriesTooShort(f"need >= 3 points, got {len(t)}")

    dE = (er[2:] - er[:-2]) / (t[2:] - t[:-2])
    bound = er[1:-1] + er[1:-1] ** 2
    valid = bound > 0
    ratios = dE[valid] / bound[valid]
    m_fit = float(max(0.0, ratios.max())) if ratios.size else 0.0
    m_check = m_fit if M is None else M
    viol = dE > m_check * bound + 1e-12
    return m_fit, float(np.mean(viol)) if len(dE) else 0.0
