"""Navier-slip boundary-condition testbed.

A library and CLI for checking slip boundary-condition formulations on
curved surfaces, div-curl norm identities, and the viscous-to-inviscid
convergence of channel flow under slip walls.

The generic differential operators dispatch on representation: analytic
fields (exact sympy-backed derivatives) and spectral channel fields share
``curl``, ``iterated_curl``, ``divergence``, and ``gradient``.
"""

import itertools
import math

import numpy as np

from . import boundary, config, experiments, fields, geometry, identities
from . import reports, snapshots, solver, spectral
from .errors import NavslipError, RuntimeFailure, ValidationError
from .fields import AnalyticField, AnalyticScalarField, catalog_field
from .geometry import (
    BallDomain,
    ChannelCellDomain,
    Ellipsoid,
    FlatWall,
    Sphere,
    SurfaceGeometry,
    TangentFrame,
    UnitSphere,
    make_surface,
)
from .solver import EnergyReport, SimConfig, SolverState
from .spectral import ChannelSpec, SobolevNorm, SpectralField

__version__ = "0.1.0"


def _is_spectral(u):
    return isinstance(u, SpectralField)


def curl(u):
    """Curl for analytic or spectral fields."""
    return spectral.curl(u) if _is_spectral(u) else fields.curl(u)


def iterated_curl(u, r):
    """r-fold curl; r = 0 is the identity."""
    return (
        spectral.iterated_curl(u, r) if _is_spectral(u) else fields.iterated_curl(u, r)
    )


def divergence(u):
    return spectral.divergence(u) if _is_spectral(u) else fields.divergence(u)


def gradient(u):
    return spectral.gradient(u) if _is_spectral(u) else fields.gradient(u)


def sobolev_norm(u, r, domain=None):
    """Discrete H^r norm: spectral fields use coefficient-space quadrature;
    analytic fields integrate over the supplied volume domain."""
    if _is_spectral(u):
        return spectral.sobolev_norm(u, r)
    if domain is None:
        raise ValueError("analytic fields need a volume domain for norms")
    pts, w = domain.volume_nodes()
    breakdown = []
    for l in range(r + 1):
        total = 0.0
        seen = set()
        tensor = u.derivative_tensor(l, pts)
        # multi-index sum: one representative per sorted direction tuple
        for dirs in itertools.product(range(3), repeat=l):
            key = tuple(sorted(dirs))
            if key in seen:
                continue
            seen.add(key)
            idx = (slice(None), slice(None)) + dirs
            vals = tensor[idx]
            total += float(np.sum(w * np.sum(vals * vals, axis=-1)))
        breakdown.append(total)
    return SobolevNorm(order=r, value=math.sqrt(sum(breakdown)), breakdown=breakdown)


def leray_project(u):
    return spectral.leray_project(u)
