"""Render figures from rau CSV outputs.

Consumes only the public CSV contracts (the time-series schema written by
`rau simulate` / `rau plot-data` and the phase-scan schema written by
`rau phase-scan`); no linkage to the simulator's internals.  Figures are
pure functions of the CSV: metadata is stripped and the SVG hash salt is
pinned so re-running a job reproduces the file byte-for-byte.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "rau-plot"

__all__ = ["PlotJob", "SchemaError", "plot_factors", "plot_elements",
           "plot_phase", "KINDS"]

TIMESERIES_COLUMNS = (
    "t,a,b,c,d,pole_flag,"
    "reU11_f,imU11_f,reU12_f,imU12_f,reU21_f,imU21_f,reU22_f,imU22_f,"
    "reU11_o,imU11_o,reU12_o,imU12_o,reU21_o,imU21_o,reU22_o,imU22_o,"
    "residual_f,det_err_f"
).split(",")

PHASE_COLUMNS = ("r,s,theta,phase,re_lambda_plus,im_lambda_plus,"
                 "re_lambda_minus,im_lambda_minus").split(",")


class SchemaError(ValueError):
    """The input CSV does not match the declared schema."""


@dataclass(frozen=True)
class PlotJob:
    input_csv: str
    kind: str  # factors | elements | phase
    output: str
    fmt: str = "png"


def _check_header(header: List[str], expected: List[str]) -> None:
    if header == expected:
        return
    missing = [c for c in expected if c not in header]
    extra = [c for c in header if c not in expected]
    parts = []
    if missing:
        parts.append(f"missing columns: {', '.join(missing)}")
    if extra:
        parts.append(f"unexpected columns: {', '.join(extra)}")
    if not parts:
        parts.append("columns out of order")
    raise SchemaError("; ".join(parts))


def _read_timeseries(path: str) -> Dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError("empty CSV")
    _check_header(rows[0], TIMESERIES_COLUMNS)
    data = {name: np.full(len(rows) - 1, np.nan) for name in TIMESERIES_COLUMNS}
    for i, row in enumerate(rows[1:]):
        if len(row) != len(TIMESERIES_COLUMNS):
            raise SchemaError(f"row {i + 2} has {len(row)} fields, "
                              f"expected {len(TIMESERIES_COLUMNS)}")
        for name, field in zip(TIMESERIES_COLUMNS, row):
            if field != "":
                data[name][i] = float(field)
    return data


def _read_phase_scan(path: str):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError("empty CSV")
    _check_header(rows[0], PHASE_COLUMNS)
    r = np.array([float(row[0]) for row in rows[1:]])
    s = np.array([float(row[1]) for row in rows[1:]])
    theta = np.array([float(row[2]) for row in rows[1:]])
    tags = [row[3] for row in rows[1:]]
    return r, s, theta, tags


def _pole_bands(t: np.ndarray, flag: np.ndarray):
    """Contiguous runs of pole_flag == 1 as (t_start, t_end) spans."""
    bands = []
    inside = flag == 1
    start = None
    for i, on in enumerate(inside):
        if on and start is None:
            start = i
        elif not on and start is not None:
            bands.append((t[start], t[i - 1]))
            start = None
    if start is not None:
        bands.append((t[start], t[-1]))
    return bands


def _save(fig, job: PlotJob) -> None:
    if job.fmt == "png":
        metadata = {"Software": None}
    else:
        metadata = {"Date": None, "Creator": None}
    fig.savefig(job.output, format=job.fmt, dpi=100, metadata=metadata)


def plot_factors(job: PlotJob):
    """Four panels, one per factor coefficient, with pole brackets shaded."""
    data = _read_timeseries(job.input_csv)
    t = data["t"]
    bands = _pole_bands(t, data["pole_flag"])
    fig, axes = plt.subplots(4, 1, sharex=True, figsize=(7, 9))
    for ax, name in zip(axes, "abcd"):
        ax.plot(t, data[name], lw=1.0, label=name)
        for lo, hi in bands:
            ax.axvspan(lo, hi, color="0.8", zorder=0)
        ax.set_ylabel(name)
        ax.grid(True, lw=0.3)
    axes[-1].set_xlabel("t")
    fig.suptitle("factor coefficients")
    _save(fig, job)
    return fig


def _elements(data: Dict[str, np.ndarray], suffix: str) -> np.ndarray:
    """(n, 2, 2) complex array from the re/im element columns."""
    n = len(data["t"])
    out = np.empty((n, 2, 2), dtype=complex)
    for i, j in ((1, 1), (1, 2), (2, 1), (2, 2)):
        out[:, i - 1, j - 1] = (data[f"reU{i}{j}_{suffix}"]
                                + 1j * data[f"imU{i}{j}_{suffix}"])
    return out


def plot_elements(job: PlotJob):
    """|U_ij|(t) for the factorized and oracle methods, four panels.

    When both methods are present, the maximum entrywise gap over rows with
    a valid factorized matrix is annotated on the figure; it reproduces the
    run summary's `cross_method_error` (the CSV round-trips doubles).
    """
    data = _read_timeseries(job.input_csv)
    t = data["t"]
    uf = _elements(data, "f")
    uo = _elements(data, "o")
    have_f = bool(np.any(np.isfinite(uf.view(float))))
    have_o = bool(np.any(np.isfinite(uo.view(float))))
    bands = _pole_bands(t, data["pole_flag"])

    fig, axes = plt.subplots(2, 2, sharex=True, figsize=(9, 7))
    for ax, (i, j) in zip(axes.flat, ((0, 0), (0, 1), (1, 0), (1, 1))):
        if have_f:
            ax.plot(t, np.abs(uf[:, i, j]), lw=1.0, label="factorized")
        if have_o:
            ax.plot(t, np.abs(uo[:, i, j]), lw=1.0, ls="--", label="oracle")
        for lo, hi in bands:
            ax.axvspan(lo, hi, color="0.8", zorder=0)
        ax.set_ylabel(f"|U{i + 1}{j + 1}|")
        ax.grid(True, lw=0.3)
    axes[0, 0].legend(loc="best", fontsize=8)
    for ax in axes[-1]:
        ax.set_xlabel("t")

    title = "propagator elements"
    if have_f and have_o:
        valid = np.all(np.isfinite(uf.reshape(len(t), -1).view(float)), axis=1)
        gap = np.max(np.abs(uf - uo), axis=(1, 2))
        max_gap = float(np.max(gap[valid])) if valid.any() else 0.0
        title += f" — max gap {max_gap:.17g}"
    fig.suptitle(title)
    _save(fig, job)
    return fig


def plot_phase(job: PlotJob):
    """Heatmap over (theta, s/r) colored by phase tag, with the analytic
    boundary s/r = |sin theta| overlaid."""
    r, s, theta, tags = _read_phase_scan(job.input_csv)
    if np.any(r == 0):
        raise SchemaError("phase diagram needs r > 0 rows (ratio s/r)")
    ratio = s / r
    tag_codes = {"broken": 0, "exceptional": 1, "unbroken": 2}
    try:
        codes = np.array([tag_codes[tag] for tag in tags], dtype=float)
    except KeyError as exc:
        raise SchemaError(f"unknown phase tag {exc.args[0]!r}") from exc

    xs = np.unique(theta)
    ys = np.unique(np.round(ratio, 12))
    grid = np.full((len(ys), len(xs)), np.nan)
    ix = np.searchsorted(xs, theta)
    iy = np.searchsorted(ys, np.round(ratio, 12))
    grid[iy, ix] = codes

    fig, ax = plt.subplots(figsize=(7, 5))
    mesh = ax.pcolormesh(xs, ys, grid, cmap="coolwarm_r", vmin=0, vmax=2,
                         shading="nearest")
    th = np.linspace(xs.min(), xs.max(), 400)
    ax.plot(th, np.abs(np.sin(th)), "k-", lw=1.2, label="s = r|sin θ|")
    ax.set_xlabel("theta")
    ax.set_ylabel("s / r")
    ax.set_ylim(ys.min(), ys.max())
    ax.legend(loc="best", fontsize=8)
    cbar = fig.colorbar(mesh, ax=ax, ticks=[0, 1, 2])
    cbar.ax.set_yticklabels(["broken", "exceptional", "unbroken"])
    fig.suptitle("PT phase diagram")
    _save(fig, job)
    return fig


KINDS = {"factors": plot_factors, "elements": plot_elements,
         "phase": plot_phase}
