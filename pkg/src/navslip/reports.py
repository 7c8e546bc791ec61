"""Report emission: CSV/JSON files and the figures rendered next to them.

CSV reals carry 17 significant digits so values reparse to the last ulp;
JSON key order follows insertion order of the report dictionaries, which
the dataclasses keep stable.  Figures are rendered with the non-interactive
matplotlib backend straight to PNG files alongside the delimited output.
"""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .errors import IoError


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, header, rows):
    """CSV with the documented column order; empty reports emit the header
    line only."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_json(path, payload):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, default=_json_default)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError(f"not JSON-serialisable: {type(obj)}")


def emit_report(report, fmt, path):
    """Serialise a report object.  ``fmt`` is ``csv`` or ``json``; objects
    offering ``rows()``/``HEADER`` go to CSV, anything with ``as_dict()``
    (or a plain dict) to JSON."""
    if fmt == "csv":
        header = getattr(report, "HEADER", None)
        rows = report.rows() if hasattr(report, "rows") else list(report)
        if header is None:
            raise ValueError("report has no CSV header")
        write_csv(path, header, rows)
    elif fmt == "json":
        payload = report.as_dict() if hasattr(report, "as_dict") else dict(report)
        write_json(path, payload)
    else:
        raise ValueError(f"unknown report format {fmt!r}")


# -- energy report -----------------------------------------------------------


def write_energy_outputs(report, out_dir, stem="energy", figures=True):
    """CSV plus the two-panel monitor figure for one run."""
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    write_csv(csv_path, report.HEADER, report.rows())
    paths = [csv_path]
    if figures:
        fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
        ax1.plot(report.t, report.E0, "k-", label="$E_0$")
        if np.any(report.Er != report.E0):
            ax1.plot(report.t, report.Er, "b--", label=f"$E_{{{report.r}}}$")
        ax1.set_ylabel("energy")
        ax1.legend(loc="best")
        ax1.grid(True, alpha=0.4)
        ax2.plot(report.t, report.balance_residual, "r-")
        ax2.set_xlabel("t")
        ax2.set_ylabel("balance residual")
        ax2.grid(True, alpha=0.4)
        fig.suptitle(
            f"nu={report.nu:g}, zeta={report.zeta:g}, dt={report.dt:g}"
        )
        png_path = os.path.join(out_dir, f"{stem}.png")
        fig.savefig(png_path, dpi=130, bbox_inches="tight")
        plt.close(fig)
        paths.append(png_path)
    return paths


# -- campaign outputs ----------------------------------------------------------


def write_campaign_outputs(result, out_dir, figures=True):
    """raw.csv, ratefit.json, rates.dat (gnuplot-friendly), rates.png."""
    header, rows = result.raw_table()
    raw_path = os.path.join(out_dir, "raw.csv")
    write_csv(raw_path, header, rows)

    fits = {f"H{r}": fit.as_dict() for r, fit in sorted(result.fits.items())}
    payload = {
        "fits": fits,
        "nu_star": result.nu_star,
        "monotone": {f"H{r}": bool(v) for r, v in sorted(result.monotone.items())},
        "gradient_probe": result.gradient_probe,
        "hr1_time_integral": {
            format(nu, ".17g"): v
            for nu, v in sorted(result.hr1_time_integral.items(), reverse=True)
        },
        "failures": [str(f) for f in result.failures],
    }
    json_path = os.path.join(out_dir, "ratefit.json")
    write_json(json_path, payload)

    orders = sorted(result.sup_errors)
    dat_path = os.path.join(out_dir, "rates.dat")
    try:
        with open(dat_path, "w", encoding="utf-8") as fh:
            fh.write("# nu " + " ".join(f"sup_err_H{r}" for r in orders) + "\n")
            by_nu = {}
            for r in orders:
                for nu, err in result.sup_errors[r]:
                    by_nu.setdefault(nu, {})[r] = err
            for nu in sorted(by_nu, reverse=True):
                vals = " ".join(_fmt(by_nu[nu].get(r, float("nan"))) for r in orders)
                fh.write(f"{_fmt(nu)} {vals}\n")
    except OSError as exc:
        raise IoError(f"cannot write {dat_path}: {exc}") from exc

    paths = [raw_path, json_path, dat_path]
    if figures:
        fig, ax = plt.subplots(figsize=(6.5, 5))
        for r in orders:
            pts = result.sup_errors[r]
            nus = [p[0] for p in pts]
            errs = [p[1] for p in pts]
            ax.loglog(nus, errs, "o", ms=7, label=f"sup$_t$ $H^{r}$ error")
            if r in result.fits:
                fit = result.fits[r]
                line = [np.exp(fit.intercept) * nu**fit.slope for nu in nus]
                ax.loglog(nus, line, "--",
                          label=f"$\\nu^{{{fit.slope:.3f}}}$ fit")
        ref_nus = sorted({p[0] for pts in result.sup_errors.values() for p in pts})
        if ref_nus:
            anchor = max(
                err for pts in result.sup_errors.values() for _, err in pts
            )
            scale = anchor / max(ref_nus) ** (1 / 3)
            ax.loglog(ref_nus, [scale * nu ** (1 / 3) for nu in ref_nus],
                      "k:", label=r"$\nu^{1/3}$ reference")
        ax.set_xlabel(r"$\nu$")
        ax.set_ylabel("sup$_t$ error")
        ax.grid(True, which="both", alpha=0.4)
        ax.legend(loc="best", fontsize=9)
        png_path = os.path.join(out_dir, "rates.png")
        fig.savefig(png_path, dpi=130, bbox_inches="tight")
        plt.close(fig)
        paths.append(png_path)
    return paths


def render_residual_table(report):
    """Human-readable lines for a BCResidualReport."""
    d = report.as_dict()
    width = max(len(k) for k in d)
    return [f"{k.ljust(width)} : {_fmt(v)}" for k, v in d.items()]
