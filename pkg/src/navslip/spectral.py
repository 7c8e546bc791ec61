"""Fourier x Fourier x Chebyshev representation of channel fields.

The channel is periodic in ``x`` and ``y`` with walls at ``z = +-1``
resolved on Chebyshev-Gauss-Lobatto points; a periodic-in-``z`` variant
(one Fourier basis in ``z``) backs the wall-free test harnesses.  Fields
are stored as amplitude coefficients: ``u(x) = sum_k u_hat(k) exp(i k x)``
in the periodic directions, Chebyshev coefficients across the gap.

Norms are computed in coefficient space: Parseval in the periodic
directions and the exact Chebyshev product Gram matrix in ``z``, so the
L2 norm of a resolved field is the exact integral of its interpolant.
Wall solves (used by the projection here and the diffusion step in the
solver) are dense tau systems per Fourier mode, LU-factorised once per
distinct horizontal wavenumber magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import OrderTooHigh


@dataclass(frozen=True)
class ChannelSpec:
    """Geometry of the periodic channel (or periodic box when z_periodic)."""

    Lx: float = 2 * np.pi
    Ly: float = 2 * np.pi
    z_periodic: bool = False
    Lz: float = 2 * np.pi  # used only when z_periodic

    @property
    def volume(self):
        return self.Lx * self.Ly * (self.Lz if self.z_periodic else 2.0)


# -- z bases -------------------------------------------------------------------


class ChebyshevZ:
    """Chebyshev-Gauss-Lobatto basis on [-1, 1] with Nz = M+1 points."""

    def __init__(self, Nz):
        if Nz < 3:
            raise ValueError("need at least 3 Chebyshev points")
        self.Nz = Nz
        self.M = Nz - 1
        j = np.arange(Nz)
        self.nodes = np.cos(np.pi * j / self.M)  # descending: +1 ... -1

    def analysis(self, values, axis=-1):
        M = self.M
        X = scipy.fft.dct(values, type=1, axis=axis)
        a = X / M
        sl0 = [slice(None)] * values.ndim
        sl0[axis] = 0
        slM = list(sl0)
        slM[axis] = M
        a[tuple(sl0)] *= 0.5
        a[tuple(slM)] *= 0.5
        return a

    def synthesis(self, coeffs, axis=-1):
        b = coeffs.copy()
        sl = [slice(None)] * coeffs.ndim
        sl[axis] = slice(1, self.M)
        b[tuple(sl)] *= 0.5
        return scipy.fft.dct(b, type=1, axis=axis)

    def deriv(self, coeffs, axis=-1):
        """Coefficient-space differentiation by the descending recurrence."""
        a = np.moveaxis(coeffs, axis, 0)
        b = np.zeros_like(a)
        M = self.M
        if M >= 1:
            b[M - 1] = 2.0 * M * a[M]
        for k in range(M - 2, 0, -1):
            b[k] = b[k + 2] + 2.0 * (k + 1) * a[k + 1]
        if M >= 2:
            b[0] = a[1] + 0.5 * b[2]
        else:
            b[0] = a[1]
        return np.moveaxis(b, 0, axis)

    def diff_matrix(self):
        """Dense coefficient-space first-derivative operator."""
        D = np.zeros((self.Nz, self.Nz))
        for j in range(self.Nz):
            e = np.zeros(self.Nz)
            e[j] = 1.0
            D[:, j] = self.deriv(e)
        return D

    def l2_gram(self):
        """Exact Gram matrix ``G[i, j] = int_{-1}^{1} T_i T_j dz``."""

        def t_int(k):
            return 2.0 / (1.0 - k * k) if k % 2 == 0 else 0.0

        i = np.arange(self.Nz)
        G = 0.5 * (
            np.array([[t_int(a + b) for b in i] for a in i])
            + np.array([[t_int(abs(a - b)) for b in i] for a in i])
        )
        return G

    def value_row(self, z_sign):
        """Row vector evaluating a coefficient vector at z = +-1."""
        k = np.arange(self.Nz)
        return np.where(k % 2 == 0, 1.0, float(z_sign))

    def deriv_row(self, z_sign):
        """Row vector evaluating the z-derivative at z = +-1:
        ``T_k'(1) = k^2``, ``T_k'(-1) = (-1)^{k+1} k^2``."""
        k = np.arange(self.Nz)
        row = k.astype(float) ** 2
        if z_sign < 0:
            row = row * np.where(k % 2 == 0, -1.0, 1.0)
        return row


class FourierZ:
    """Periodic Fourier basis in z (wall-free harness)."""

    def __init__(self, Nz, Lz=2 * np.pi):
        self.Nz = Nz
        self.Lz = float(Lz)
        self.nodes = self.Lz * np.arange(Nz) / Nz
        self.kz = 2 * np.pi * np.fft.fftfreq(Nz, d=self.Lz / Nz)
        self.kz_deriv = self.kz.copy()
        if Nz % 2 == 0:
            self.kz_deriv[Nz // 2] = 0.0

    def analysis(self, values, axis=-1):
        return np.fft.fft(values, axis=axis, norm="forward")

    def synthesis(self, coeffs, axis=-1):
        return np.fft.ifft(coeffs, axis=axis, norm="forward")

    def deriv(self, coeffs, axis=-1):
        shape = [1] * coeffs.ndim
        shape[axis] = self.Nz
        return coeffs * (1j * self.kz_deriv).reshape(shape)

    def l2_gram(self):
        return self.Lz * np.eye(self.Nz)


# -- the field -----------------------------------------------------------------


def wavenumbers(N, L):
    return 2 * np.pi * np.fft.fftfreq(N, d=L / N)


def deriv_wavenumbers(N, L):
    """Wavenumbers for odd-order differentiation: the unpaired Nyquist mode
    is zeroed so derivatives of real fields stay conjugate symmetric."""
    k = wavenumbers(N, L)
    if N % 2 == 0:
        k[N // 2] = 0.0
    return k


class SpectralField:
    """Velocity (or any 3-vector) field as a coefficient tensor
    ``(3, Nx, Ny, Nz)``."""

    def __init__(self, coeffs, spec, dealiased=False):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 4 or coeffs.shape[0] != 3:
            raise ValueError("coeffs must have shape (3, Nx, Ny, Nz)")
        self.coeffs = coeffs
        self.spec = spec
        self.dealiased = bool(dealiased)

    # constructors ----------------------------------------------------------

    @classmethod
    def from_grid(cls, values, spec, dealiased=False):
        values = np.asarray(values, dtype=float)
        _, Nx, Ny, Nz = values.shape
        zb = z_basis(spec, Nz)
        c = np.fft.fft2(values, axes=(1, 2), norm="forward").astype(complex)
        c = zb.analysis(c, axis=-1)
        return cls(c, spec, dealiased)

    @classmethod
    def from_analytic(cls, field, spec, shape):
        Nx, Ny, Nz = shape
        xs = spec.Lx * np.arange(Nx) / Nx
        ys = spec.Ly * np.arange(Ny) / Ny
        zs = z_basis(spec, Nz).nodes
        xx, yy, zz = np.meshgrid(xs, ys, zs, indexing="ij")
        pts = np.stack([xx, yy, zz], axis=-1).reshape(-1, 3)
        vals = np.atleast_2d(field.value(pts))
        grid = vals.T.reshape(3, Nx, Ny, Nz)
        return cls.from_grid(grid, spec)

    @classmethod
    def zeros(cls, spec, shape):
        return cls(np.zeros((3, *shape), dtype=complex), spec, dealiased=True)

    # basics ------------------------------------------------------------------

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    def copy(self):
        return SpectralField(self.coeffs.copy(), self.spec, self.dealiased)

    def grid(self):
        zb = z_basis(self.spec, self.shape[2])
        vals = zb.synthesis(self.coeffs, axis=-1)
        return np.fft.ifft2(vals, axes=(1, 2), norm="forward").real

    def hermitian_symmetry_error(self):
        """Max deviation from the conjugate symmetry of a real field."""
        c = self.coeffs
        flipped = c[:, _neg_index(self.shape[0])][:, :, _neg_index(self.shape[1])]
        if self.spec.z_periodic:
            flipped = flipped[:, :, :, _neg_index(self.shape[2])]
        return float(np.abs(c - np.conj(flipped)).max())

    def __add__(self, other):
        return SpectralField(self.coeffs + other.coeffs, self.spec,
                             self.dealiased and other.dealiased)

    def __sub__(self, other):
        return SpectralField(self.coeffs - other.coeffs, self.spec,
                             self.dealiased and other.dealiased)

    def __mul__(self, scalar):
        return SpectralField(self.coeffs * scalar, self.spec, self.dealiased)

    __rmul__ = __mul__


def _neg_index(N):
    idx = np.zeros(N, dtype=int)
    idx[1:] = np.arange(N - 1, 0, -1)
    return idx


_Z_CACHE = {}


def z_basis(spec, Nz):
    key = (spec.z_periodic, Nz, spec.Lz if spec.z_periodic else None)
    if key not in _Z_CACHE:
        _Z_CACHE[key] = (
            FourierZ(Nz, spec.Lz) if spec.z_periodic else ChebyshevZ(Nz)
        )
    return _Z_CACHE[key]


def _k_arrays(field):
    Nx, Ny, _ = field.shape
    kx = deriv_wavenumbers(Nx, field.spec.Lx)[None, :, None, None]
    ky = deriv_wavenumbers(Ny, field.spec.Ly)[None, None, :, None]
    return kx, ky


def deriv_x(field, coeffs=None):
    kx, _ = _k_arrays(field)
    c = field.coeffs if coeffs is None else coeffs
    return 1j * kx * c


def deriv_y(field, coeffs=None):
    _, ky = _k_arrays(field)
    c = field.coeffs if coeffs is None else coeffs
    return 1j * ky * c


def deriv_z(field, coeffs=None):
    zb = z_basis(field.spec, field.shape[2])
    c = field.coeffs if coeffs is None else coeffs
    return zb.deriv(c, axis=-1)


def divergence(field):
    """Scalar coefficient array of div(u)."""
    c = field.coeffs
    return (
        deriv_x(field, c[0:1])[0]
        + deriv_y(field, c[1:2])[0]
        + deriv_z(field, c[2:3])[0]
    )


def curl(field):
    c = field.coeffs
    dx = lambda comp: deriv_x(field, c[comp : comp + 1])[0]
    dy = lambda comp: deriv_y(field, c[comp : comp + 1])[0]
    dz = lambda comp: deriv_z(field, c[comp : comp + 1])[0]
    out = np.stack([dy(2) - dz(1), dz(0) - dx(2), dx(1) - dy(0)])
    return SpectralField(out, field.spec, field.dealiased)


def iterated_curl(field, r):
    max_order = field.shape[2] // 4 if not field.spec.z_periodic else 64
    if r < 0 or r > max_order:
        raise OrderTooHigh(
            f"curl order {r} outside [0, {max_order}] for Nz={field.shape[2]}"
        )
    out = field
    for _ in range(r):
        out = curl(out)
    return out


def gradient(field):
    """All nine partials as a coefficient tensor (3, 3, Nx, Ny, Nz) with
    ``out[i, j] = d u_i / d x_j``."""
    c = field.coeffs
    return np.stack(
        [deriv_x(field, c), deriv_y(field, c), deriv_z(field, c)], axis=1
    )


def dealias_mask(field):
    """2/3-rule mask over the periodic directions (and z if periodic)."""
    Nx, Ny, Nz = field.shape
    mx = np.abs(np.fft.fftfreq(Nx) * Nx) <= Nx / 3.0
    my = np.abs(np.fft.fftfreq(Ny) * Ny) <= Ny / 3.0
    mask = mx[None, :, None, None] & my[None, None, :, None]
    if field.spec.z_periodic:
        mz = np.abs(np.fft.fftfreq(Nz) * Nz) <= Nz / 3.0
        mask = mask & mz[None, None, None, :]
    return mask


def apply_dealias(field):
    out = field.coeffs * dealias_mask(field)
    return SpectralField(out, field.spec, dealiased=True)


# -- norms ----------------------------------------------------------------------


_GRAM_CACHE = {}


def _gram(spec, Nz):
    key = (spec.z_periodic, Nz, spec.Lz if spec.z_periodic else None)
    if key not in _GRAM_CACHE:
        _GRAM_CACHE[key] = z_basis(spec, Nz).l2_gram()
    return _GRAM_CACHE[key]


def l2_norm_sq(field, coeffs=None):
    """Exact squared L2 norm of the interpolant over the channel cell."""
    c = field.coeffs if coeffs is None else coeffs
    G = _gram(field.spec, field.shape[2])
    flat = c.reshape(-1, c.shape[-1])
    val = np.sum((flat @ G) * np.conj(flat)).real
    return float(field.spec.Lx * field.spec.Ly * val)


def inner_product(u, v):
    G = _gram(u.spec, u.shape[2])
    a = u.coeffs.reshape(-1, u.coeffs.shape[-1])
    b = v.coeffs.reshape(-1, v.coeffs.shape[-1])
    val = np.sum((b @ G) * np.conj(a)).real
    return float(u.spec.Lx * u.spec.Ly * val)


def wall_values(field, z_sign):
    """Physical-space values on the wall z = sign (channel only):
    returns a grid array (3, Nx, Ny)."""
    zb = z_basis(field.spec, field.shape[2])
    row = zb.value_row(z_sign)
    cwall = field.coeffs @ row
    return np.fft.ifft2(cwall, axes=(1, 2), norm="forward").real


def wall_integral_sq(field, z_sign):
    """``int_wall |u|^2 dx dy`` by Parseval on the wall plane."""
    zb = z_basis(field.spec, field.shape[2])
    row = zb.value_row(z_sign)
    cwall = field.coeffs @ row
    return float(field.spec.Lx * field.spec.Ly * np.sum(np.abs(cwall) ** 2))


@dataclass
class SobolevNorm:
    """Discrete H^r norm with its per-derivative-order breakdown.

    ``breakdown[l]`` is the sum of ``|d^alpha u|^2_{L2}`` over multi-indices
    with ``|alpha| = l``; ``value**2 == sum(breakdown)``.
    """

    order: int
    value: float
    breakdown: list

    def as_dict(self):
        return {
            "order": self.order,
            "value": self.value,
            "breakdown": list(self.breakdown),
        }


def _multi_indices(total):
    for a1 in range(total + 1):
        for a2 in range(total - a1 + 1):
            yield (a1, a2, total - a1 - a2)


def derivative_coeffs(field, alpha):
    """Coefficients of the mixed partial ``d^alpha u``."""
    a1, a2, a3 = alpha
    kx, ky = _k_arrays(field)
    c = field.coeffs * (1j * kx) ** a1 * (1j * ky) ** a2
    zb = z_basis(field.spec, field.shape[2])
    for _ in range(a3):
        c = zb.deriv(c, axis=-1)
    return c


def sobolev_norm(field, r):
    """Multi-index H^r norm ``(sum_{|alpha| <= r} |d^alpha u|^2)^{1/2}``."""
    max_r = field.shape[2] // 4
    if r < 0 or (not field.spec.z_periodic and r > max_r):
        raise OrderTooHigh(f"H^{r} norm unsupported at Nz={field.shape[2]}")
    breakdown = []
    for l in range(r + 1):
        total = 0.0
        for alpha in _multi_indices(l):
            total += l2_norm_sq(field, derivative_coeffs(field, alpha))
        breakdown.append(total)
    return SobolevNorm(order=r, value=float(np.sqrt(sum(breakdown))),
                       breakdown=breakdown)


def curl_norms_sq(field, up_to):
    """``|curl^l u|^2_{L2}`` for ``l = 0 .. up_to`` (curl-variant norm)."""
    out = []
    g = field
    for l in range(up_to + 1):
        out.append(l2_norm_sq(g))
        if l < up_to:
            g = curl(g)
    return out


def grid_max_abs(field):
    return float(np.abs(field.grid()).max())


# -- wall (tau) solves -----------------------------------------------------------


class TauSolver:
    """Dense Chebyshev tau solves for every Fourier mode at once.

    Systems sharing a horizontal wavenumber magnitude are identical, so one
    inverse per distinct ``k^2`` is formed and expanded to a per-mode stack
    ``(Nx*Ny, Nz, Nz)``; applying it is a single batched matmul (real and
    imaginary parts separately, keeping the big operand real)."""

    def __init__(self, Nx, Ny, Nz, Lx, Ly, deriv_consistent=False):
        self.zb = ChebyshevZ(Nz)
        self.D2 = self.zb.diff_matrix() @ self.zb.diff_matrix()
        # deriv_consistent: use the Nyquist-zeroed wavenumbers so that
        # div(grad) applied by the spectral operators matches the solve
        kfun = deriv_wavenumbers if deriv_consistent else wavenumbers
        kx = kfun(Nx, Lx)
        ky = kfun(Ny, Ly)
        k2 = kx[:, None] ** 2 + ky[None, :] ** 2
        flat = np.round(k2.ravel(), 10)
        uniq, inverse = np.unique(flat, return_inverse=True)
        self.k2_values = uniq
        # modes sorted by group so each group is one contiguous slice
        order = np.argsort(inverse, kind="stable")
        self.mode_order = order
        self.unsort = np.argsort(order)
        counts = np.bincount(inverse, minlength=len(uniq))
        self.group_slices = np.concatenate([[0], np.cumsum(counts)])
        self.k0_modes = np.nonzero(flat == 0.0)[0]
        self.flat_shape = (Nx, Ny)
        self._inv = {}
        self._zero_row = {}

    def factor(self, name, c_ident_fn, c_d2_fn, bc_rows, extra_row_for_k0=None):
        """Prepare inverses for the family ``c_ident(k2) I + c_d2(k2) D2``
        with the two tau rows replaced by ``bc_rows`` (two length-Nz row
        vectors).  ``extra_row_for_k0`` pins a nullspace direction of the
        k2 = 0 system (e.g. the pressure mean)."""
        Nz = self.zb.Nz
        invs = np.empty((len(self.k2_values), Nz, Nz))
        for g, k2 in enumerate(self.k2_values):
            A = c_ident_fn(k2) * np.eye(Nz) + c_d2_fn(k2) * self.D2
            A[Nz - 2, :] = bc_rows[0]
            A[Nz - 1, :] = bc_rows[1]
            if extra_row_for_k0 is not None and k2 == 0.0:
                A[Nz - 3, :] = extra_row_for_k0
            invs[g] = np.linalg.inv(A)
        self._inv[name] = invs
        self._zero_row[name] = extra_row_for_k0 is not None

    def solve(self, name, rhs_coeffs, bc_values=(0.0, 0.0)):
        """Solve the factored family for every Fourier mode.

        ``rhs_coeffs`` has shape (Nx, Ny, Nz); the two tau rows of the RHS
        are replaced by ``bc_values`` (scalars or (Nx, Ny) arrays).
        Real and imaginary parts ride through one real GEMM per distinct
        wavenumber magnitude.
        """
        Nx, Ny = self.flat_shape
        Nz = self.zb.Nz
        rhs = rhs_coeffs.reshape(Nx * Ny, Nz).astype(complex)
        rhs[:, Nz - 2] = np.broadcast_to(bc_values[0], (Nx, Ny)).reshape(-1)
        rhs[:, Nz - 1] = np.broadcast_to(bc_values[1], (Nx, Ny)).reshape(-1)
        if self._zero_row[name] and len(self.k0_modes):
            rhs[self.k0_modes, Nz - 3] = 0.0
        sorted_rhs = rhs[self.mode_order]
        stacked = np.concatenate([sorted_rhs.real, sorted_rhs.imag], axis=1)
        out = np.empty_like(stacked)
        invs = self._inv[name]
        bounds = self.group_slices
        for g in range(len(invs)):
            lo, hi = bounds[g], bounds[g + 1]
            blk = stacked[lo:hi].reshape(-1, Nz)
            out[lo:hi] = (blk @ invs[g].T).reshape(hi - lo, 2 * Nz)
        res = out[:, :Nz] + 1j * out[:, Nz:]
        return res[self.unsort].reshape(Nx, Ny, Nz)


class LerayProjector:
    """Divergence-free projection on the channel.

    Removes ``grad p`` where ``(d_zz - k^2) p_hat = div_hat`` per Fourier
    mode with Neumann data ``d_z p(+-1) = u_z(+-1)``, so the projected field
    has exactly zero wall-normal velocity; the pressure mean of the k = 0
    mode is pinned to zero.
    """

    def __init__(self, spec, shape):
        if spec.z_periodic:
            self.periodic = True
            self.spec, self.shape = spec, shape
            return
        self.periodic = False
        self.spec, self.shape = spec, shape
        Nx, Ny, Nz = shape
        self.tau = TauSolver(Nx, Ny, Nz, spec.Lx, spec.Ly, deriv_consistent=True)
        zb = self.tau.zb
        mean_row = zb.l2_gram()[0]  # int p dz = 0 for the k=0 mode
        self.tau.factor(
            "poisson",
            c_ident_fn=lambda k2: -k2,
            c_d2_fn=lambda k2: 1.0,
            bc_rows=[zb.deriv_row(+1), zb.deriv_row(-1)],
            extra_row_for_k0=mean_row,
        )

    def project(self, field, return_potential=False):
        """Project; optionally also return the scalar potential whose
        gradient was removed (coefficient array (Nx, Ny, Nz))."""
        if self.periodic:
            return self._project_periodic(field, return_potential)
        div = divergence(field)
        zb = self.tau.zb
        uz_top = field.coeffs[2] @ zb.value_row(+1)
        uz_bot = field.coeffs[2] @ zb.value_row(-1)
        p = self.tau.solve("poisson", div, bc_values=(uz_top, uz_bot))
        kx, ky = _k_arrays(field)
        gp = np.stack(
            [
                (1j * kx[0] * p[None])[0],
                (1j * ky[0] * p[None])[0],
                zb.deriv(p, axis=-1),
            ]
        )
        out = SpectralField(field.coeffs - gp, field.spec, field.dealiased)
        return (out, p) if return_potential else out

    def _project_periodic(self, field, return_potential=False):
        Nx, Ny, Nz = field.shape
        kx = deriv_wavenumbers(Nx, field.spec.Lx)[:, None, None]
        ky = deriv_wavenumbers(Ny, field.spec.Ly)[None, :, None]
        kz = deriv_wavenumbers(Nz, field.spec.Lz)[None, None, :]
        k2 = kx**2 + ky**2 + kz**2
        k2_safe = np.where(k2 == 0, 1.0, k2)
        kdotu = (
            kx * field.coeffs[0] + ky * field.coeffs[1] + kz * field.coeffs[2]
        )
        factor = np.where(k2 == 0, 0.0, kdotu / k2_safe)
        out = field.coeffs - np.stack([kx * factor, ky * factor, kz * factor])
        result = SpectralField(out, field.spec, field.dealiased)
        if return_potential:
            # potential phi with grad(phi) removed: phi_hat = -i kdotu / k2
            return result, np.where(k2 == 0, 0.0, -1j * kdotu / k2_safe)
        return result


_PROJECTOR_CACHE = {}


def leray_project(field):
    """Project onto divergence-free fields tangent to the walls (cached
    per domain/resolution)."""
    key = (field.spec, field.shape)
    if key not in _PROJECTOR_CACHE:
        _PROJECTOR_CACHE[key] = LerayProjector(field.spec, field.shape)
    return _PROJECTOR_CACHE[key].project(field)


def divergence_linf(field):
    """Max pointwise |div u| on the collocation grid."""
    div = divergence(field)
    zb = z_basis(field.spec, field.shape[2])
    vals = zb.synthesis(div, axis=-1)
    return float(np.abs(np.fft.ifft2(vals, axes=(0, 1), norm="forward").real).max())
