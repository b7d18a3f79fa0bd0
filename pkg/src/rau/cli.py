"""Command-line entry point.

Commands: eigen, simulate, phase-scan, makharko-check, verify, plot-data.
Configuration is a single JSON document; outputs are deterministic CSV
(%.17g formatting, LF line endings) and JSON summaries.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 verification failure.  Verbosity via RAU_LOG in {error, warn, info, debug}.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from typing import List, Optional

import numpy as np

from . import makharko, verify
from .models import (CouplingDomainError, PTModelParams, PTPhase,
                     SpinModelParams, StaticPTParams, coupling_from_dict,
                     eigen_analysis, pt_phase)
from .oracle import OracleConfig
from .propagator import SimulationResult, simulate
from .riccati import (IntegrationBudgetError, IntegratorConfig,
                      closed_form_b_proportional, integrate_factors_pt)

log = logging.getLogger("rau")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3

CSV_HEADER = (
    "t,a,b,c,d,pole_flag,"
    "reU11_f,imU11_f,reU12_f,imU12_f,reU21_f,imU21_f,reU22_f,imU22_f,"
    "reU11_o,imU11_o,reU12_o,imU12_o,reU21_o,imU21_o,reU22_o,imU22_o,"
    "residual_f,det_err_f"
)


class ConfigError(ValueError):
    pass


def _setup_logging() -> None:
    level = {"error": logging.ERROR, "warn": logging.WARNING,
             "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("RAU_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _fmt(x: float) -> str:
    return "" if not np.isfinite(x) else "%.17g" % x


# ---------------------------------------------------------------------------
# config parsing


def _require(block: dict, field: str, where: str):
    if field not in block:
        raise ConfigError(f"missing required field '{field}' in '{where}'")
    return block[field]


def parse_model(block) -> "PTModelParams | SpinModelParams":
    if not isinstance(block, dict):
        raise ConfigError("missing required field 'model' (object)")
    kind = _require(block, "model", "model")
    if kind == "pt":
        return PTModelParams(
            nu=float(_require(block, "nu", "model")),
            kappa=coupling_from_dict(_require(block, "kappa", "model")),
            lam=coupling_from_dict(_require(block, "lambda", "model")))
    if kind == "spin":
        return SpinModelParams(
            omega=float(_require(block, "omega", "model")),
            alpha_coeff=float(_require(block, "alpha", "model")),
            kappa=coupling_from_dict(_require(block, "kappa", "model")))
    raise ConfigError(f"field 'model.model' must be 'pt' or 'spin', got {kind!r}")


def parse_run_config(doc: dict):
    if "model" not in doc:
        raise ConfigError("missing required field 'model'")
    model = parse_model(doc["model"])
    time = doc.get("time", {})
    t0 = float(_require(time, "t0", "time"))
    t1 = float(_require(time, "t1", "time"))
    if t1 <= t0:
        raise ConfigError("field 'time.t1' must exceed 'time.t0'")
    points = int(time.get("output_grid_points",
                          max(2, int(round((t1 - t0) / 1e-3)) + 1)))
    if points < 2:
        raise ConfigError("field 'time.output_grid_points' must be >= 2")
    integ = doc.get("integrator", {})
    try:
        cfg = IntegratorConfig(
            initial_step=float(integ.get("initial_step", 1e-3)),
            rel_tol=float(integ.get("rel_tol", 1e-9)),
            abs_tol=float(integ.get("abs_tol", 1e-12)),
            pole_threshold=float(integ.get("pole_threshold", 1e6)),
            max_steps=int(integ.get("max_steps", 10_000_000)))
    except ValueError as exc:
        raise ConfigError(f"bad 'integrator' block: {exc}") from exc
    orc = doc.get("oracle", {})
    try:
        ocfg = OracleConfig(step=float(orc.get("step", 1e-4)),
                            scheme=orc.get("scheme", "midpoint_exponential"))
    except ValueError as exc:
        raise ConfigError(f"bad 'oracle' block: {exc}") from exc
    method = doc.get("method", "both")
    if method not in ("factorized", "oracle", "both"):
        raise ConfigError("field 'method' must be factorized|oracle|both")
    output = doc.get("output", {})
    return model, t0, t1, points, cfg, ocfg, method, output


# ---------------------------------------------------------------------------
# CSV / JSON emission


def result_csv_lines(res: SimulationResult) -> List[str]:
    lines = [CSV_HEADER]
    n = len(res.times)
    traj = res.trajectory

    def in_bracket(t):
        return any(e.t_lo <= t <= e.t_hi for e in res.pole_events)

    fac = res.factorized.matrices if res.factorized is not None else [None] * n
    orc = res.oracle.matrices if res.oracle is not None else [None] * n
    for i in range(n):
        t = res.times[i]
        flag = 1 if in_bracket(t) else 0
        if traj is not None and not flag:
            abcd = [_fmt(traj.a[i]), _fmt(traj.b[i]), _fmt(traj.c[i]),
                    _fmt(traj.d[i])]
        else:
            abcd = ["", "", "", ""]
        row = [_fmt(t)] + abcd + [str(flag)]
        for mats, blank_in_bracket in ((fac, True), (orc, False)):
            m = mats[i]
            if m is None or (blank_in_bracket and flag):
                row += [""] * 8
            else:
                for entry in (m.m11, m.m12, m.m21, m.m22):
                    row += [_fmt(entry.real), _fmt(entry.imag)]
        row += [_fmt(res.residual_rows[i]), _fmt(res.det_err_rows[i])]
        lines.append(",".join(row))
    return lines


def result_summary(res: SimulationResult) -> dict:
    return {
        "residual": res.report.max_schrodinger_residual,
        "det_error": res.report.max_det_error,
        "cross_method_error": res.report.max_cross_method_error,
        "pole_events": [
            {"t_lo": e.t_lo, "t_hi": e.t_hi,
             "diverging_component": e.diverging_component}
            for e in res.pole_events],
    }


def _write_text(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_eigen(args) -> int:
    p = StaticPTParams(args.r, args.s, args.theta)
    es = eigen_analysis(p)
    phase = pt_phase(p)
    print(f"phase: {phase.value}")
    print(f"lambda_plus:  {es.lambda_plus.real:+.9g} {es.lambda_plus.imag:+.9g}i")
    print(f"lambda_minus: {es.lambda_minus.real:+.9g} {es.lambda_minus.imag:+.9g}i")
    print(f"alpha: {es.alpha.real:+.9g} {es.alpha.imag:+.9g}i "
          f"({'PT eigenstates' if es.pt_eigenstates else 'not PT eigenstates'})")
    print(f"psi_plus:  [{es.psi_plus[0]:.9g}, {es.psi_plus[1]:.9g}]")
    print(f"psi_minus: [{es.psi_minus[0]:.9g}, {es.psi_minus[1]:.9g}]")
    doc = {
        "phase": phase.value,
        "lambda_plus": [es.lambda_plus.real, es.lambda_plus.imag],
        "lambda_minus": [es.lambda_minus.real, es.lambda_minus.imag],
        "alpha": [es.alpha.real, es.alpha.imag],
        "pt_eigenstates": es.pt_eigenstates,
        "psi_plus": [[v.real, v.imag] for v in es.psi_plus],
        "psi_minus": [[v.real, v.imag] for v in es.psi_minus],
    }
    print(json.dumps(doc))
    return EXIT_OK


def _run_simulate(args, csv_only: bool) -> int:
    with open(args.config) as fh:
        doc = json.load(fh)
    model, t0, t1, points, cfg, ocfg, method, output = parse_run_config(doc)
    try:
        res = simulate(model, t0, t1, cfg, method=method, oracle_cfg=ocfg,
                       output_grid_points=points,
                       reanchor=bool(doc.get("reanchor", False)))
    except (IntegrationBudgetError, CouplingDomainError) as exc:
        log.error("simulation failed: %s", exc)
        return EXIT_NUMERICAL

    csv_path = args.csv or output.get("csv")
    _write_text(csv_path, "\n".join(result_csv_lines(res)) + "\n")
    if not csv_only:
        summary_path = args.summary or output.get("summary")
        if summary_path is not None:
            _write_text(summary_path,
                        json.dumps(result_summary(res), indent=2) + "\n")
        else:
            print(json.dumps(result_summary(res)))
    if res.pole_events and method == "factorized":
        log.error("factorization pole with no oracle fallback")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_simulate(args) -> int:
    return _run_simulate(args, csv_only=False)


def cmd_plot_data(args) -> int:
    return _run_simulate(args, csv_only=True)


def cmd_phase_scan(args) -> int:
    for name in ("r", "s", "theta"):
        if getattr(args, f"{name}_points") < 1:
            print(f"error: --{name}-points must be >= 1", file=sys.stderr)
            return EXIT_CONFIG
    rs = np.linspace(args.r_min, args.r_max, args.r_points)
    ss = np.linspace(args.s_min, args.s_max, args.s_points)
    ths = np.linspace(args.theta_min, args.theta_max, args.theta_points)
    grid = [(r, s, th) for r in rs for s in ss for th in ths]

    def row(point):
        r, s, th = point
        es = eigen_analysis(StaticPTParams(r, s, th))
        tag = pt_phase(StaticPTParams(r, s, th))
        return ",".join([_fmt(r), _fmt(s), _fmt(th), tag.value,
                         _fmt(es.lambda_plus.real), _fmt(es.lambda_plus.imag),
                         _fmt(es.lambda_minus.real), _fmt(es.lambda_minus.imag)])

    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(row, grid, chunksize=64))
    else:
        rows = [row(pt) for pt in grid]
    header = ("r,s,theta,phase,re_lambda_plus,im_lambda_plus,"
              "re_lambda_minus,im_lambda_minus")
    _write_text(args.out, "\n".join([header] + rows) + "\n")
    return EXIT_OK


def cmd_makharko_check(args) -> int:
    with open(args.config) as fh:
        doc = json.load(fh)
    if "p" not in doc:
        print("error: missing required field 'p'", file=sys.stderr)
        return EXIT_CONFIG
    p = float(doc["p"])
    if abs(p) == 1.0:
        print("error: field 'p' must differ from +-1", file=sys.stderr)
        return EXIT_CONFIG
    kappa = coupling_from_dict(_require(doc, "kappa", "config"))
    t0 = float(doc.get("t0", 0.0))
    t1 = float(doc.get("t1", 1.0))
    points = int(doc.get("grid_points", 100))
    h = float(doc.get("fd_width", 1e-5))
    report: dict = {"p": p, "warnings": []}

    if p == 0.0:
        report["skipped"] = ("p = 0 gives lambda identically zero; the "
                            "integrability condition divides by lambda")
        print(json.dumps(report, indent=2))
        return EXIT_OK
    if abs(1.0 - p * p) < 1e-4:
        report["warnings"].append(
            f"1 - p^2 = {1 - p * p:.3e}: proportionality factor poorly conditioned")

    case = makharko.IntegrabilityCase.from_kappa(p, kappa)
    grid = np.linspace(t0 + h, t1 - h, points)
    branches = {}
    for br in ("plus", "minus"):
        vals = []
        for t in grid:
            try:
                vals.append(abs(makharko.integrability_residual(
                    case.kappa, case.lam, case.f, br, t, h)))
            except (ZeroDivisionError, makharko.BranchError):
                continue
        branches[br] = {
            "max_residual": max(vals) if vals else None,
            "mean_residual": float(np.mean(vals)) if vals else None,
            "evaluated_points": len(vals),
        }
    report["branches"] = branches
    finite = {br: v["max_residual"] for br, v in branches.items()
              if v["max_residual"] is not None}
    report["best_branch"] = min(finite, key=finite.get) if finite else None
    try:
        report["constancy_deviation"] = makharko.constancy_deviation(case, grid)
    except (ZeroDivisionError, makharko.BranchError) as exc:
        report["constancy_deviation"] = None
        report["warnings"].append(f"constancy check skipped: {exc}")

    # operational meaning: closed-form b equals direct integration
    try:
        cf = closed_form_b_proportional(p, kappa, t0, t1, max(points, 2))
        model = PTModelParams(nu=0.0, kappa=kappa, lam=case.lam)
        tr = integrate_factors_pt(model, t0, t1, times=cf.times)
        mask = np.isfinite(cf.b) & np.isfinite(tr.b)
        report["closed_form_agreement"] = (
            float(np.max(np.abs(cf.b[mask] - tr.b[mask]))) if mask.any() else None)
    except ValueError as exc:
        report["closed_form_agreement"] = None
        report["warnings"].append(f"closed-form comparison skipped: {exc}")

    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify.run_all_checks(args.tolerance)
    ok = True
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  [{r.detail}]")
        ok = ok and r.passed
    print(f"{'all checks passed' if ok else 'VERIFICATION FAILED'}")
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rau",
        description="Factorized evolution operators for time-dependent "
                    "PT-symmetric two-level systems")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eigen", help="static-model spectrum and PT phase")
    e.add_argument("--r", type=float, required=True)
    e.add_argument("--s", type=float, required=True)
    e.add_argument("--theta", type=float, required=True)
    e.set_defaults(fn=cmd_eigen)

    for name, fn, help_ in (("simulate", cmd_simulate,
                             "run factorized/oracle propagation from a JSON config"),
                            ("plot-data", cmd_plot_data,
                             "like simulate, emitting only the CSV")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("config", help="path to the JSON run configuration")
        s.add_argument("--csv", help="override CSV output path ('-' = stdout)")
        s.add_argument("--summary", help="override JSON summary path")
        s.set_defaults(fn=fn)

    ps = sub.add_parser("phase-scan", help="PT phase diagram over a parameter grid")
    for name, lo, hi in (("r", 0.0, 3.0), ("s", 0.1, 3.0),
                         ("theta", 0.0, math.pi)):
        ps.add_argument(f"--{name}-min", type=float, default=lo)
        ps.add_argument(f"--{name}-max", type=float, default=hi)
        ps.add_argument(f"--{name}-points", type=int, default=20)
    ps.add_argument("--out", default="-", help="CSV output path ('-' = stdout)")
    ps.add_argument("--jobs", type=int, default=1)
    ps.set_defaults(fn=cmd_phase_scan)

    mk = sub.add_parser("makharko-check",
                        help="integrability-condition report for a coupling family")
    mk.add_argument("config", help="path to the JSON check configuration")
    mk.set_defaults(fn=cmd_makharko_check)

    v = sub.add_parser("verify", help="run the full invariant suite")
    v.add_argument("--tolerance", type=float, default=None,
                   help="override every check tolerance (liveness probe)")
    v.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
