"""Subcommand CLI: geometry queries, boundary-condition checks, identity
verification, the channel solver, and the viscosity-ladder experiment.

Exit codes: 0 success, 1 validation error (bad flags, config, or
preconditions), 2 runtime failure (solver blow-up, broken files).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .boundary import (
    CURVATURE_SIGN,
    equivalence_check,
    iterated_navier_residual,
    kinematic_residual,
    navier_classical_residual,
    navier_geometric_residual,
    slip_type_residual,
)
from .config import load_config, validate_schema
from .errors import NavslipError, ValidationError
from .experiments import CampaignSpec, inviscid_limit_campaign
from .fields import catalog_field, catalog_names, solenoidal_poly
from .geometry import (
    BallDomain,
    ChannelCellDomain,
    Sphere,
    curvatures,
    make_surface,
    normal,
    tangent_frame,
)
from .identities import (
    divcurl_base_check,
    divcurl_ratio,
    persistence_check,
    vector_identity_checks,
)
from .reports import (
    render_residual_table,
    write_campaign_outputs,
    write_energy_outputs,
    write_json,
)
from .snapshots import write_snapshot
from .solver import SimConfig, energy_balance_check, init_state, run
from .spectral import ChannelSpec

CONFIG_SCHEMA = {
    "domain": {"Lx", "Ly", "z_periodic", "Lz"},
    "solver": {
        "nu", "zeta", "resolution", "dt", "T", "r", "save_every",
        "cfl_number", "amplitude", "normalize_Er",
    },
    "initial": {
        "field", "seed", "degree", "zeta", "branch", "direction", "parity",
        "transverse_wavenumber", "vortex_amplitude",
    },
    "campaign": {"nu_ladder", "zeta", "error_orders"},
    "surface": {"surface", "radius", "semi_axes", "z0", "orientation"},
}

_INITIAL_PARAM_TYPES = {
    "seed": int,
    "degree": int,
    "zeta": float,
    "branch": int,
    "direction": str,
    "parity": str,
    "transverse_wavenumber": int,
    "vortex_amplitude": float,
}


def _parse_vec(text):
    parts = [float(tok) for tok in text.split(",")]
    if len(parts) != 3:
        raise ValidationError(f"expected three comma-separated reals, got {text!r}")
    return np.array(parts)


def _surface_from_args(args, doc=None):
    name = getattr(args, "surface", None)
    params = {}
    if doc is not None and doc.has("surface", "surface"):
        name = name or doc.get_str("surface", "surface")
        if doc.has("surface", "radius"):
            params["radius"] = doc.get_float("surface", "radius")
        if doc.has("surface", "semi_axes"):
            params["semi_axes"] = tuple(doc.get_float_list("surface", "semi_axes"))
        if doc.has("surface", "z0"):
            params["z0"] = doc.get_float("surface", "z0")
        if doc.has("surface", "orientation"):
            params["orientation"] = doc.get_int("surface", "orientation")
    if name is None:
        raise ValidationError("no surface given (flag --surface or [surface] section)")
    if getattr(args, "radius", None) is not None:
        params["radius"] = args.radius
    if getattr(args, "semi_axes", None) is not None:
        params["semi_axes"] = tuple(float(t) for t in args.semi_axes.split(","))
    if getattr(args, "z0", None) is not None:
        params["z0"] = args.z0
    if getattr(args, "orientation", None) is not None:
        params["orientation"] = args.orientation
    try:
        return make_surface(name, **params)
    except (ValueError, TypeError) as exc:
        raise ValidationError(str(exc)) from exc


def _field_from_args(name, args):
    params = {}
    for spec in args.param or []:
        if "=" not in spec:
            raise ValidationError(f"--param expects key=value, got {spec!r}")
        key, raw = spec.split("=", 1)
        key = key.strip()
        caster = _INITIAL_PARAM_TYPES.get(key, float)
        try:
            params[key] = caster(raw)
        except ValueError as exc:
            raise ValidationError(f"--param {key}: {exc}") from exc
    if args.zeta is not None and "zeta" in _accepted_params(name):
        params.setdefault("zeta", args.zeta)
    if args.seed is not None and "seed" in _accepted_params(name):
        params.setdefault("seed", args.seed)
    return catalog_field(name, **params)


def _accepted_params(name):
    import inspect

    from .fields import _CATALOG

    fn = _CATALOG.get(name.lower())
    if fn is None:
        return set()
    return set(inspect.signature(fn).parameters)


def _say(args, *msg):
    if not args.quiet:
        print(*msg)


def _ensure_out(args):
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


# -- subcommands ------------------------------------------------------------


def _maybe_doc(args):
    if getattr(args, "config", None):
        doc = load_config(args.config)
        validate_schema(doc, CONFIG_SCHEMA)
        return doc
    return None


def cmd_geom(args):
    surface = _surface_from_args(args, _maybe_doc(args))
    x = _parse_vec(args.point)
    n = normal(surface, x)
    K, H = curvatures(surface, x)
    frame = tangent_frame(surface, x)
    payload = {
        "surface": surface.kind,
        "point": x.tolist(),
        "normal": n.tolist(),
        "gauss_curvature": K,
        "mean_curvature": H,
        "e1": frame.e1.tolist(),
        "e2": frame.e2.tolist(),
    }
    print(json.dumps(payload, indent=2))
    return 0


def cmd_bc_check(args):
    surface = _surface_from_args(args, _maybe_doc(args))
    fld = _field_from_args(args.field, args)
    zeta = args.zeta if args.zeta is not None else 1.0
    reports = [kinematic_residual(fld, surface)]
    if zeta > 0:
        reports.append(navier_classical_residual(fld, surface, zeta))
        reports.append(
            navier_geometric_residual(fld, surface, zeta, args.sigma)
        )
    reports.append(slip_type_residual(fld, surface))
    if args.order:
        reports.append(
            iterated_navier_residual(fld, surface, zeta, args.order, args.sigma)
        )
    payload = {
        "surface": surface.kind,
        "field": fld.label,
        "reports": [r.as_dict() for r in reports],
    }
    for rep in reports:
        _say(args, f"-- {rep.condition}")
        for line in render_residual_table(rep):
            _say(args, "   " + line)
    out = args.out
    if out:
        os.makedirs(out, exist_ok=True)
        write_json(os.path.join(out, "bc_check.json"), payload)
        _say(args, f"wrote {os.path.join(out, 'bc_check.json')}")
    else:
        print(json.dumps(payload, indent=2))
    return 0


def _default_corpus(surface, seed):
    corpus = [solenoidal_poly(seed=seed + k, degree=3, tangent_to=surface)
              for k in range(3)]
    if isinstance(surface, Sphere):
        from .fields import rigid_rotation

        corpus.append(rigid_rotation((0.0, 0.0, 1.0)))
    return corpus


def cmd_identity(args):
    seed = args.seed if args.seed is not None else 0
    results = []
    if args.check == "divcurl":
        if args.surface in (None, "sphere", "unit_sphere"):
            dom = BallDomain(1.0, 48, 48, 48)
            corpus = [
                solenoidal_poly(seed=seed + k, degree=3, tangent_to=dom.surface)
                for k in range(args.corpus_size)
            ]
        else:
            raise ValidationError("divcurl check runs on the unit ball")
        for u in corpus:
            results.append(divcurl_base_check(u, dom).as_dict())
    elif args.check == "ratio":
        dom = ChannelCellDomain(n_x=16, n_y=16, n_z=48)
        zeta = args.zeta if args.zeta is not None else 1.0
        from .fields import channel_robin_mode

        corpus = [
            channel_robin_mode(zeta=zeta, branch=b, direction=d, parity=p)
            for b, d, p in [(0, "x", "even"), (0, "y", "odd"), (1, "x", "even")]
        ]
        for u in corpus:
            results.append(
                divcurl_ratio(u, dom, args.order or 1, zeta=zeta).as_dict()
            )
    elif args.check == "vector":
        dom = BallDomain(1.0, 32, 32, 32)
        u = solenoidal_poly(seed=seed, degree=3)
        w = solenoidal_poly(seed=seed + 1, degree=3)
        results = [rep.as_dict() for rep in vector_identity_checks(u, w, dom)]
    elif args.check == "equivalence":
        surface = _surface_from_args(args, _maybe_doc(args))
        zeta = args.zeta if args.zeta is not None else 1.0
        sigma, dev = equivalence_check(surface, zeta, _default_corpus(surface, seed))
        results = [{
            "name": "equivalence",
            "sigma_star": sigma,
            "max_deviation": dev,
            "frozen_sign": CURVATURE_SIGN,
        }]
    else:
        raise ValidationError(f"unknown identity check {args.check!r}")
    payload = {"check": args.check, "results": results}
    if args.out:
        out = _ensure_out(args)
        path = os.path.join(out, f"identity_{args.check}.json")
        write_json(path, payload)
        _say(args, f"wrote {path}")
    else:
        print(json.dumps(payload, indent=2))
    return 0


def cmd_persistence(args):
    surface = _surface_from_args(args, _maybe_doc(args))
    u0 = _field_from_args(args.u0, args)
    w0 = _field_from_args(args.omega0, args)
    x0 = _parse_vec(args.x0)
    verdict = persistence_check(u0, w0, surface, x0)
    payload = verdict.as_dict()
    payload["u0"] = u0.label
    payload["omega0"] = w0.label
    if args.out:
        out = _ensure_out(args)
        path = os.path.join(out, "persistence.json")
        write_json(path, payload)
        _say(args, f"wrote {path}")
    else:
        print(json.dumps(payload, indent=2))
    return 0


def _sim_config_from_doc(doc, seed=None):
    spec = ChannelSpec(
        Lx=doc.get_float("domain", "Lx", 2 * math.pi),
        Ly=doc.get_float("domain", "Ly", 2 * math.pi),
        z_periodic=doc.get_bool("domain", "z_periodic", False),
        Lz=doc.get_float("domain", "Lz", 2 * math.pi),
    )
    res = doc.get_int_list("solver", "resolution", [32, 32, 65])
    if len(res) != 3:
        raise ValidationError("resolution needs three integers")
    params = {}
    for key, caster in _INITIAL_PARAM_TYPES.items():
        if doc.has("initial", key):
            getter = {
                int: doc.get_int, float: doc.get_float, str: doc.get_str
            }[caster]
            params[key] = getter("initial", key)
    if seed is not None and "seed" not in params:
        fld_name = doc.get_str("initial", "field", "taylor_green")
        if "seed" in _accepted_params(fld_name):
            params["seed"] = seed
    return SimConfig(
        nu=doc.get_float("solver", "nu", 0.0),
        zeta=doc.get_float("solver", "zeta", 1.0),
        resolution=tuple(res),
        dt=doc.get_float("solver", "dt", 1e-3),
        T=doc.get_float("solver", "T", 0.5),
        r=doc.get_int("solver", "r", 2),
        save_every=doc.get_int("solver", "save_every", 10),
        initial=doc.get_str("initial", "field", "taylor_green"),
        initial_params=params,
        amplitude=doc.get_float("solver", "amplitude", 1.0),
        normalize_Er=doc.get_bool("solver", "normalize_Er", False),
        spec=spec,
        cfl_number=doc.get_float("solver", "cfl_number", 2.0),
    )


def _load_validated_config(args):
    if not args.config:
        raise ValidationError("this subcommand needs --config PATH")
    doc = load_config(args.config)
    validate_schema(doc, CONFIG_SCHEMA)
    return doc


def cmd_simulate(args):
    doc = _load_validated_config(args)
    cfg = _sim_config_from_doc(doc, seed=args.seed)
    out = _ensure_out(args)
    _say(args, f"run: nu={cfg.nu:g} zeta={cfg.zeta:g} res={cfg.resolution} "
               f"dt={cfg.dt:g} T={cfg.T:g}")
    _, diag = init_state(cfg)
    _say(args, "init diagnostics:", json.dumps(diag))
    snaps, report = run(cfg, keep_snapshots=True)
    paths = write_energy_outputs(report, out, figures=not args.no_figures)
    balance = energy_balance_check(report)
    write_json(os.path.join(out, "balance.json"),
               {**balance.as_dict(), "init": diag})
    paths.append(os.path.join(out, "balance.json"))
    t_final, u_final = snaps[-1]
    snap_path = os.path.join(out, "final.vfld")
    write_snapshot(snap_path, u_final, t=t_final, nu=cfg.nu, zeta=cfg.zeta)
    paths.append(snap_path)
    if args.save_all:
        for i, (t, u) in enumerate(snaps):
            p = os.path.join(out, f"snap_{i:04d}.vfld")
            write_snapshot(p, u, t=t, nu=cfg.nu, zeta=cfg.zeta)
    for p in paths:
        _say(args, f"wrote {p}")
    return 0


def cmd_inviscid_limit(args):
    doc = _load_validated_config(args)
    base = _sim_config_from_doc(doc, seed=args.seed)
    ladder = doc.get_float_list("campaign", "nu_ladder",
                                [1e-2, 3e-3, 1e-3, 3e-4, 1e-4])
    zeta = doc.get_float("campaign", "zeta", base.zeta)
    orders = doc.get_int_list("campaign", "error_orders", [base.r])
    spec = CampaignSpec(
        base=base, nu_ladder=tuple(ladder), zeta=zeta, error_orders=tuple(orders)
    )
    out = _ensure_out(args)
    progress = None if args.quiet else (lambda msg: print(msg, flush=True))
    result = inviscid_limit_campaign(spec, progress=progress)
    paths = write_campaign_outputs(result, out, figures=not args.no_figures)
    for p in paths:
        _say(args, f"wrote {p}")
    for r, fit in sorted(result.fits.items()):
        _say(args, f"H{r}: slope {fit.slope:.4f} "
                   f"(>= 1/3 - 0.02: {fit.meets_cuberoot_bound}, "
                   f">= 1/2 - 0.05: {fit.consistent_with_sqrt})")
    return 0


def cmd_catalog(args):
    payload = {
        "fields": catalog_names(),
        "surfaces": ["unit_sphere", "sphere", "ellipsoid", "flat_wall"],
    }
    print(json.dumps(payload, indent=2))
    return 0


# -- entry point --------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="navslip",
        description="Slip boundary conditions, curl identities, and the "
                    "vanishing-viscosity experiment on a channel.",
    )
    p.add_argument("--version", action="version", version=f"navslip {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file path")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="seed for seeded catalog fields")
    common.add_argument("--quiet", action="store_true", help="suppress chatter")

    surf = argparse.ArgumentParser(add_help=False)
    surf.add_argument("--surface", help="unit_sphere | sphere | ellipsoid | flat_wall")
    surf.add_argument("--radius", type=float)
    surf.add_argument("--semi-axes", dest="semi_axes", help="a,b,c")
    surf.add_argument("--z0", type=float)
    surf.add_argument("--orientation", type=int, choices=(-1, 1))

    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("geom", parents=[common, surf],
                       help="normal, curvatures, and frame at a point")
    g.add_argument("--point", required=True, help="x,y,z")
    g.set_defaults(fn=cmd_geom)

    b = sub.add_parser("bc-check", parents=[common, surf],
                       help="boundary-condition residuals for a catalog field")
    b.add_argument("--field", required=True)
    b.add_argument("--zeta", type=float, default=1.0)
    b.add_argument("--sigma", type=int, choices=(-1, 1), default=CURVATURE_SIGN)
    b.add_argument("--order", type=int, help="also check this iterated order")
    b.add_argument("--param", action="append", help="field parameter key=value")
    b.set_defaults(fn=cmd_bc_check)

    i = sub.add_parser("identity", parents=[common, surf],
                       help="verify an integral identity on a corpus")
    i.add_argument("--check", required=True,
                   choices=("divcurl", "ratio", "vector", "equivalence"))
    i.add_argument("--zeta", type=float)
    i.add_argument("--order", type=int)
    i.add_argument("--corpus", default="default", choices=("default",),
                   help="named check corpus")
    i.add_argument("--corpus-size", type=int, default=5)
    i.set_defaults(fn=cmd_identity)

    pe = sub.add_parser("persistence", parents=[common, surf],
                        help="bracket-based persistence criterion")
    pe.add_argument("--u0", required=True)
    pe.add_argument("--omega0", required=True)
    pe.add_argument("--x0", required=True, help="x,y,z")
    pe.add_argument("--zeta", type=float)
    pe.add_argument("--param", action="append")
    pe.set_defaults(fn=cmd_persistence)

    s = sub.add_parser("simulate", parents=[common],
                       help="one channel run from a config file")
    s.add_argument("--no-figures", action="store_true")
    s.add_argument("--save-all", action="store_true",
                   help="write every snapshot, not just the final state")
    s.set_defaults(fn=cmd_simulate)

    il = sub.add_parser("inviscid-limit", parents=[common],
                        help="viscosity-ladder convergence experiment")
    il.add_argument("--no-figures", action="store_true")
    il.set_defaults(fn=cmd_inviscid_limit)

    c = sub.add_parser("catalog", parents=[common],
                       help="list catalog fields and surfaces")
    c.set_defaults(fn=cmd_catalog)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NavslipError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
