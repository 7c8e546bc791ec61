"""Config parsing, snapshot format, report emission, CLI contract."""

import json
import math
import os
import struct

import numpy as np
import pytest

from conftest import smooth_random_field
from navslip.cli import main
from navslip.config import parse_config, validate_schema
from navslip.errors import (
    BadMagic,
    ConfigSyntaxError,
    TruncatedPayload,
    TypeMismatch,
    UnknownKey,
    VersionUnsupported,
)
from navslip.reports import write_csv, write_json
from navslip.snapshots import read_snapshot, write_snapshot
from navslip.solver import EnergyReport


# -- config -------------------------------------------------------------------


def test_parse_basic_section():
    doc = parse_config("[solver]\nnu = 0.001\n")
    assert doc.get_float("solver", "nu") == 0.001


def test_parse_comments_and_lists():
    text = """
# campaign setup
[campaign]
nu_ladder = 1e-2, 1e-3, 1e-4   # descending
error_orders = 2, 3
"""
    doc = parse_config(text)
    assert doc.get_float_list("campaign", "nu_ladder") == [1e-2, 1e-3, 1e-4]
    assert doc.get_int_list("campaign", "error_orders") == [2, 3]


def test_type_mismatch():
    doc = parse_config("[solver]\nnu = banana\n")
    with pytest.raises(TypeMismatch) as err:
        doc.get_float("solver", "nu")
    assert err.value.key == "nu"


def test_syntax_errors_carry_line_numbers():
    with pytest.raises(ConfigSyntaxError) as err:
        parse_config("[solver]\nnu 0.001\n")
    assert err.value.line_no == 2
    with pytest.raises(ConfigSyntaxError) as err2:
        parse_config("nu = 1\n")
    assert err2.value.line_no == 1
    with pytest.raises(ConfigSyntaxError):
        parse_config("[solver\nnu = 1\n")


def test_unknown_key_rejected_with_line():
    doc = parse_config("[solver]\nnu = 0.1\nwarp = 9\n")
    with pytest.raises(UnknownKey) as err:
        validate_schema(doc, {"solver": {"nu"}})
    assert err.value.key == "warp"
    assert err.value.line_no == 3


def test_unknown_section_rejected():
    doc = parse_config("[warp_drive]\nx = 1\n")
    with pytest.raises(UnknownKey):
        validate_schema(doc, {"solver": {"nu"}})


# -- snapshots ------------------------------------------------------------------


def test_snapshot_round_trip_bit_exact(tmp_path):
    u = smooth_random_field(13, shape=(8, 8, 9))
    path = tmp_path / "field.vfld"
    stored = u.grid()
    write_snapshot(path, u, t=0.25, nu=1e-3, zeta=0.5)
    v, header = read_snapshot(path)
    assert np.array_equal(stored, header.grid)  # payload is bit exact
    assert np.abs(v.grid() - stored).max() < 1e-13  # one transform round trip
    assert header.t == 0.25 and header.nu == 1e-3 and header.zeta == 0.5
    assert (header.Nx, header.Ny, header.Nz) == (8, 8, 9)


def test_snapshot_periodic_round_trip(tmp_path):
    from navslip.spectral import ChannelSpec

    u = smooth_random_field(17, spec=ChannelSpec(z_periodic=True),
                            shape=(8, 8, 8))
    path = tmp_path / "periodic.vfld"
    stored = u.grid()
    write_snapshot(path, u, t=2.0)
    v, header = read_snapshot(path)
    assert header.domain_kind == 1
    assert v.spec.z_periodic
    assert np.array_equal(stored, header.grid)


def test_snapshot_bad_magic(tmp_path):
    u = smooth_random_field(1, shape=(4, 4, 5))
    path = tmp_path / "field.vfld"
    write_snapshot(path, u)
    blob = bytearray(path.read_bytes())
    blob[:4] = b"XFLD"
    path.write_bytes(bytes(blob))
    with pytest.raises(BadMagic):
        read_snapshot(path)


def test_snapshot_version_unsupported(tmp_path):
    u = smooth_random_field(2, shape=(4, 4, 5))
    path = tmp_path / "field.vfld"
    write_snapshot(path, u)
    blob = bytearray(path.read_bytes())
    blob[4:8] = struct.pack("<I", 9)
    path.write_bytes(bytes(blob))
    with pytest.raises(VersionUnsupported):
        read_snapshot(path)


def test_snapshot_truncated(tmp_path):
    u = smooth_random_field(3, shape=(4, 4, 5))
    path = tmp_path / "field.vfld"
    write_snapshot(path, u)
    blob = path.read_bytes()
    path.write_bytes(blob[:-8])  # drop exactly one value
    with pytest.raises(TruncatedPayload):
        read_snapshot(path)


def test_snapshot_header_layout(tmp_path):
    u = smooth_random_field(4, shape=(4, 4, 5))
    path = tmp_path / "field.vfld"
    write_snapshot(path, u, t=1.5)
    blob = path.read_bytes()
    assert blob[:4] == b"VFLD"
    version, kind = struct.unpack_from("<IB", blob, 4)
    assert version == 1 and kind == 0
    n = struct.unpack_from("<III", blob, 9)
    assert n == (4, 4, 5)


# -- reports --------------------------------------------------------------------


def test_csv_reals_reparse_to_ulp(tmp_path):
    path = tmp_path / "vals.csv"
    vals = [math.pi, 1.0 / 3.0, 6.02214076e23, 5e-324]
    write_csv(path, ["v"], [[v] for v in vals])
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "v"
    for line, v in zip(lines[1:], vals):
        assert float(line) == v  # 17 significant digits round-trip exactly


def test_empty_csv_has_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_csv(path, ["t", "E0"], [])
    assert path.read_text() == "t,E0\n"


def test_energy_report_csv_header(tmp_path):
    rep = EnergyReport(
        t=np.array([0.0, 0.1]), E0=np.array([1.0, 0.9]),
        diss=np.array([0.0, 0.1]), wall=np.array([0.0, 0.05]),
        Er=np.array([1.0, 0.8]), balance_residual=np.array([0.0, 1e-9]),
        nu=0.1, zeta=1.0, r=2, dt=1e-3,
    )
    path = tmp_path / "energy.csv"
    write_csv(path, rep.HEADER, rep.rows())
    first = path.read_text().splitlines()[0]
    assert first == "t,E0,diss,wall,Er,balance_residual"


def test_emit_report_dispatch(tmp_path):
    from navslip.reports import emit_report
    from navslip.experiments import fit_rate

    rep = EnergyReport(
        t=np.array([0.0]), E0=np.array([1.0]), diss=np.array([0.0]),
        wall=np.array([0.0]), Er=np.array([1.0]),
        balance_residual=np.array([0.0]), nu=0.0, zeta=1.0, r=2, dt=1e-3,
    )
    csv_path = tmp_path / "e.csv"
    emit_report(rep, "csv", csv_path)
    assert csv_path.read_text().startswith("t,E0,diss,wall,Er,balance_residual")
    fit = fit_rate([(1e-2, 0.1), (1e-3, 0.05), (1e-4, 0.02)])
    json_path = tmp_path / "f.json"
    emit_report(fit, "json", json_path)
    assert "slope" in json.loads(json_path.read_text())
    with pytest.raises(ValueError):
        emit_report(fit, "xml", tmp_path / "f.xml")


def test_ratefit_json_contains_slope(tmp_path):
    from navslip.experiments import fit_rate

    fit = fit_rate([(1e-2, 0.1), (1e-3, 0.0316227766), (1e-4, 0.01)])
    path = tmp_path / "fit.json"
    write_json(path, fit.as_dict())
    data = json.loads(path.read_text())
    assert "slope" in data
    assert abs(data["slope"] - 0.5) < 1e-6


# -- CLI ------------------------------------------------------------------------


def test_cli_catalog_exit_zero(capsys):
    assert main(["catalog"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert "rigid_rotation" in out["fields"]


def test_cli_surface_from_config_section(tmp_path, capsys):
    cfg = tmp_path / "surf.cfg"
    cfg.write_text("[surface]\nsurface = ellipsoid\nsemi_axes = 2.0,1.0,1.0\n")
    rc = main(["geom", "--config", str(cfg), "--point", "2,0,0"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["gauss_curvature"] - 4.0) < 1e-10


def test_cli_geom(capsys):
    rc = main(["geom", "--surface", "ellipsoid", "--semi-axes", "2,1,1",
               "--point", "2,0,0"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["gauss_curvature"] - 4.0) < 1e-10


def test_cli_bc_check_json(tmp_path, capsys):
    rc = main(["bc-check", "--surface", "sphere", "--field", "rigid_rotation",
               "--zeta", "1.0", "--out", str(tmp_path), "--quiet"])
    assert rc == 0
    data = json.loads((tmp_path / "bc_check.json").read_text())
    conditions = [r["condition"] for r in data["reports"]]
    assert "kinematic" in conditions and "navier_geometric" in conditions


def test_cli_identity_checks(tmp_path, capsys):
    rc = main(["identity", "--check", "vector", "--seed", "3"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    names = [r["name"] for r in out["results"]]
    assert "advection_decomposition" in names and "curl_by_parts" in names
    rc2 = main(["identity", "--check", "divcurl", "--surface", "sphere",
                "--corpus-size", "2", "--out", str(tmp_path), "--quiet"])
    assert rc2 == 0
    data = json.loads((tmp_path / "identity_divcurl.json").read_text())
    assert all(r["rel_residual"] < 1e-6 for r in data["results"])


def test_cli_persistence(capsys):
    rc = main(["persistence", "--surface", "unit_sphere",
               "--u0", "rigid_rotation", "--omega0", "shear_z",
               "--x0", "0,0,1"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == "PredictsFailure"
    assert abs(out["bracket_cross_n_norm"] - 1.0) < 1e-10


def test_cli_validation_error_exit_one(capsys):
    rc = main(["geom", "--surface", "sphere", "--point", "0,0,9"])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_cli_unknown_config_key_exit_one(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[solver]\nnu = 0.1\nwarp = yes\n")
    rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 1


def test_cli_simulate_and_outputs(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "[solver]\n"
        "nu = 0.1\nzeta = 1.0\nresolution = 8,8,33\ndt = 1e-3\nT = 0.02\n"
        "save_every = 5\n"
        "[initial]\nfield = channel_robin_mode\nzeta = 1.0\n"
    )
    out = tmp_path / "results"
    rc = main(["simulate", "--config", str(cfg), "--out", str(out), "--quiet"])
    assert rc == 0
    assert (out / "energy.csv").exists()
    assert (out / "energy.png").exists()
    assert (out / "balance.json").exists()
    assert (out / "final.vfld").exists()
    field, header = read_snapshot(out / "final.vfld")
    assert header.nu == 0.1
    balance = json.loads((out / "balance.json").read_text())
    assert balance["lhs"] < 1e-8


def test_cli_inviscid_limit_outputs(tmp_path):
    cfg = tmp_path / "campaign.cfg"
    cfg.write_text(
        "[solver]\n"
        "nu = 0.0\nzeta = 1.0\nresolution = 8,8,17\ndt = 2e-3\nT = 0.03\n"
        "save_every = 5\nr = 2\nnormalize_Er = true\n"
        "[initial]\nfield = sheared_vortex\nzeta = 1.0\n"
        "[campaign]\nnu_ladder = 1e-2, 3e-3, 1e-3\nzeta = 1.0\n"
        "error_orders = 2\n"
    )
    out = tmp_path / "results"
    rc = main(["inviscid-limit", "--config", str(cfg), "--out", str(out),
               "--quiet"])
    assert rc == 0
    for name in ("raw.csv", "ratefit.json", "rates.dat", "rates.png"):
        assert (out / name).exists(), name
    data = json.loads((out / "ratefit.json").read_text())
    assert "slope" in data["fits"]["H2"]
    header = (out / "raw.csv").read_text().splitlines()[0]
    assert header == "nu,t,err_H2,grad_inf"


def test_cli_runtime_failure_exit_two(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "[solver]\nnu = 0.0\nresolution = 8,8,9\ndt = 1e-3\nT = 0.002\n"
        "[initial]\nfield = taylor_green\n"
    )
    import navslip.cli as cli_mod
    from navslip.errors import NaNDetected

    def exploding_run(*a, **kw):
        raise NaNDetected(3)

    monkeypatch.setattr(cli_mod, "run", exploding_run)
    rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 2
    assert "failure" in capsys.readouterr().err
