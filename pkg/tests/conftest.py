"""Shared fixtures and independent-oracle helpers for the test suite."""

import numpy as np
import pytest

from navslip.spectral import ChannelSpec, SpectralField


def smooth_random_field(seed, spec=None, shape=(16, 16, 33), decay=0.8):
    """Random real field with exponentially decaying spectrum; smooth enough
    that tau truncation errors stay near machine precision."""
    spec = spec or ChannelSpec()
    rng = np.random.default_rng(seed)
    Nx, Ny, Nz = shape
    c = rng.normal(size=(3, Nx, Ny, Nz)) + 1j * rng.normal(size=(3, Nx, Ny, Nz))
    kx = np.abs(np.fft.fftfreq(Nx) * Nx)[None, :, None, None]
    ky = np.abs(np.fft.fftfreq(Ny) * Ny)[None, None, :, None]
    kz = np.arange(Nz)[None, None, None, :]
    c = c * np.exp(-decay * (kx + ky + kz))
    rough = SpectralField(c, spec)
    return SpectralField.from_grid(rough.grid(), spec)


def grid_quadrature_l2_sq(field, n_gl=200):
    """Independent L2 oracle: Gauss-Legendre in z on values obtained by
    direct Chebyshev evaluation, node sums in the periodic directions."""
    spec = field.spec
    Nx, Ny, Nz = field.shape
    if spec.z_periodic:
        g = field.grid()
        return spec.Lx * spec.Ly * spec.Lz * float(np.mean(np.sum(g * g, axis=0)))
    zg, wz = np.polynomial.legendre.leggauss(n_gl)
    cxy = np.fft.ifft2(field.coeffs, axes=(1, 2), norm="forward")
    vals = np.polynomial.chebyshev.chebval(zg, np.moveaxis(cxy, -1, 0))
    sq = np.sum(np.abs(vals) ** 2, axis=0)  # sum over components
    per_node = np.mean(sq, axis=(0, 1))  # mean over x, y
    return float(spec.Lx * spec.Ly * np.sum(wz * per_node))


def fd_jacobian(field, pts, h=1e-5):
    """Central finite differences of the value evaluator."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    out = np.empty((pts.shape[0], 3, 3))
    for j in range(3):
        dp = np.zeros(3)
        dp[j] = h
        out[:, :, j] = (field.value(pts + dp) - field.value(pts - dp)) / (2 * h)
    return out


@pytest.fixture(scope="session")
def unit_sphere():
    from navslip.geometry import Sphere

    return Sphere(1.0)


@pytest.fixture(scope="session")
def ellipsoid211():
    from navslip.geometry import Ellipsoid

    return Ellipsoid(2.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def top_wall():
    from navslip.geometry import FlatWall

    return FlatWall(z0=1.0, orientation=+1)
