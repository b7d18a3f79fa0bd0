"""Assemble the factorized propagator, invert it, and verify it.

The ordered product e^{-ia} e^{ib s+} e^{ic s-} e^{d sz} multiplies out, with
the nilpotent exponentials expanded, to

    e^{-ia} [[ (1 - 4bc) e^d,  2ib e^{-d} ],
             [ 2ic e^d,        e^{-d}     ]]

(spin variant: global prefactor i e^{a} instead of e^{-ia}).  Each factor has
unit determinant, so det U = e^{-2ia} (pt) / -e^{2a} (spin) exactly.  The
inverse map -- a Gauss (triangular) decomposition -- exists iff U_22 != 0;
U_22 -> 0 is precisely the Riccati pole where the chart fails.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .models import hamiltonian_at, PTModelParams, SpinModelParams
from .oracle import (OracleConfig, PropagatorSeries, default_initial,
                     rk4_direct, time_ordered_product)
from .pauli_algebra import Complex2x2
from .riccati import (FactorState, FactorTrajectory, IntegratorConfig,
                      PoleEvent, integrate_factors_pt, integrate_factors_spin)

__all__ = [
    "ChartFailureError",
    "ResidualReport",
    "SimulationResult",
    "assemble_pt",
    "assemble_spin",
    "gauss_decompose",
    "schrodinger_residual",
    "simulate",
]

_CHART_EPS = 1e-12


class ChartFailureError(ValueError):
    """The factorization chart does not cover this matrix (|U_22| ~ 0)."""


@dataclass(frozen=True)
class ResidualReport:
    max_schrodinger_residual: float
    max_det_error: float
    max_cross_method_error: float


def _assemble_core(s: FactorState) -> np.ndarray:
    ed = np.exp(s.d)
    return np.array([
        [(1.0 - 4.0 * s.b * s.c) * ed, 2j * s.b / ed],
        [2j * s.c * ed, 1.0 / ed],
    ])


def assemble_pt(s: FactorState) -> Complex2x2:
    return Complex2x2.from_array(np.exp(-1j * s.a) * _assemble_core(s))


def assemble_spin(s: FactorState) -> Complex2x2:
    return Complex2x2.from_array(1j * np.exp(s.a) * _assemble_core(s))


def gauss_decompose(u: Complex2x2, convention: str = "schrodinger",
                    model_tag: str = "pt") -> FactorState:
    """Invert the factorization: recover (a, b, c, d) from U.

    a comes from the determinant on the principal log branch, d from the
    (2,2) entry, b and c from the off-diagonal entries.  Raises
    ChartFailureError when |U_22| < 1e-12 (the factorization pole).  For a
    real quadruple, U must lie on a real-coefficient flow of the matching
    model; real parts are returned.
    """
    if abs(u.m22) < _CHART_EPS:
        raise ChartFailureError(
            f"|U_22| = {abs(u.m22):.3e} < {_CHART_EPS}: factorization pole")
    det = u.det()
    if det == 0:
        raise ChartFailureError("singular matrix has no factorization")
    if model_tag == "pt":
        a = 0.5j * cmath.log(det)          # e^{-2ia} = det U
        v = u.to_array() * cmath.exp(1j * a)
    else:
        a = 0.5 * cmath.log(-det)          # det U = -e^{2a}
        v = u.to_array() / (1j * cmath.exp(a))
    d = -cmath.log(v[1, 1])
    b = v[0, 1] * cmath.exp(d) / 2j
    c = v[1, 0] * cmath.exp(-d) / 2j
    return FactorState(a=a.real, b=b.real, c=c.real, d=d.real)


def series_from_trajectory(traj: FactorTrajectory) -> PropagatorSeries:
    """Assemble a propagator series over a factor trajectory; grid points
    invalidated by a pole carry None."""
    assemble = assemble_pt if traj.model_tag == "pt" else assemble_spin
    mask = traj.valid_mask()
    mats: List[Optional[Complex2x2]] = []
    for ok, st in zip(mask, traj.states):
        mats.append(assemble(st) if ok else None)
    convention = "schrodinger" if traj.model_tag == "pt" else "flow"
    return PropagatorSeries(times=traj.times, matrices=mats,
                            convention=convention, source="factorized")


def _series_arrays(series: PropagatorSeries) -> np.ndarray:
    out = np.full((len(series.matrices), 2, 2), np.nan + 0j)
    for i, m in enumerate(series.matrices):
        if m is not None:
            out[i] = m.to_array()
    return out


def _residual_rows(series: PropagatorSeries, model) -> tuple:
    """Per-grid-time Schrodinger residual and Liouville determinant error
    (NaN at the endpoints and wherever the series is invalid)."""
    t = series.times
    u = _series_arrays(series)
    n = len(t)
    G = -1j if series.convention == "schrodinger" else 1.0

    res = np.full(n, np.nan)
    for i in range(1, n - 1):
        if not (np.all(np.isfinite(u[i - 1])) and np.all(np.isfinite(u[i]))
                and np.all(np.isfinite(u[i + 1]))):
            continue
        du = (u[i + 1] - u[i - 1]) / (t[i + 1] - t[i - 1])
        h = hamiltonian_at(model, t[i]).to_array()
        res[i] = np.max(np.abs(du - G * h @ u[i]))

    # Liouville: det U(t) = det U(t0) * exp( int tr(G H) )
    tr = np.array([G * np.trace(hamiltonian_at(model, x).to_array()) for x in t])
    itr = np.concatenate(([0.0 + 0j], np.cumsum((tr[1:] + tr[:-1]) / 2 * np.diff(t))))
    det_pred = None
    det_err = np.full(n, np.nan)
    dets = u[:, 0, 0] * u[:, 1, 1] - u[:, 0, 1] * u[:, 1, 0]
    # reference determinant from the first valid point
    first = next((i for i in range(n) if np.isfinite(dets[i])), None)
    if first is not None:
        det_pred = dets[first] * np.exp(itr - itr[first])
        for i in range(n):
            if np.isfinite(dets[i]):
                det_err[i] = abs(dets[i] - det_pred[i])
    return res, det_err


def schrodinger_residual(series: PropagatorSeries, model) -> ResidualReport:
    if len(series.times) < 3:
        raise ValueError("need >= 3 time points for central differences")
    res, det_err = _residual_rows(series, model)
    return ResidualReport(
        max_schrodinger_residual=float(np.nanmax(res)),
        max_det_error=float(np.nanmax(det_err)),
        max_cross_method_error=0.0,
    )


@dataclass
class SimulationResult:
    times: np.ndarray
    trajectory: Optional[FactorTrajectory]
    factorized: Optional[PropagatorSeries]
    oracle: Optional[PropagatorSeries]
    report: ResidualReport
    pole_events: List[PoleEvent]
    residual_rows: np.ndarray
    det_err_rows: np.ndarray
    cross_rows: np.ndarray

    @property
    def cross_method_error(self) -> float:
        return self.report.max_cross_method_error


def _decompose_real(u: Complex2x2, convention: str, model_tag: str) -> FactorState:
    """Gauss-decompose onto real factors, tolerating the U_22 < 0 sheet.

    The principal-branch decomposition drops the i*pi in d when U_22 is
    negative, which flips the sign of the reassembled matrix.  For the pt
    chart the sign can be carried by a instead (e^{-i(a+pi)} = -e^{-ia}), so
    when the round trip misses we decompose -U and shift a by pi.
    """
    st = gauss_decompose(u, convention, model_tag)
    assemble = assemble_pt if model_tag == "pt" else assemble_spin
    if (assemble(st) - u).max_abs() > 1e-6 and model_tag == "pt":
        neg = gauss_decompose(u.scaled(-1.0), convention, model_tag)
        st = FactorState(a=neg.a + np.pi, b=neg.b, c=neg.c, d=neg.d)
    return st


def _integrate_with_reanchor(model, t0, t1, cfg, times, oracle_series,
                             model_tag):
    """Integrate factors; after each pole bracket restart from the oracle's
    matrix (Gauss-decomposed) at the first post-bracket grid point."""
    integrate = integrate_factors_pt if model_tag == "pt" else integrate_factors_spin
    convention = "schrodinger" if model_tag == "pt" else "flow"
    traj = integrate(model, t0, t1, cfg, times=times)
    events = list(traj.pole_events)
    while events and oracle_series is not None:
        t_hi = events[-1].t_hi
        restart = np.searchsorted(times, t_hi, side="right")
        if restart >= len(times) - 1:
            break
        u_re = oracle_series.matrices[restart]
        try:
            st = _decompose_real(u_re, convention, model_tag)
        except ChartFailureError:
            restart += 1
            if restart >= len(times) - 1:
                break
            st = _decompose_real(oracle_series.matrices[restart],
                                 convention, model_tag)
        tail = integrate(model, times[restart], t1, cfg,
                         times=times[restart:],
                         initial_state=(st.a, st.b, st.c, st.d))
        traj.a[restart:] = tail.a
        traj.b[restart:] = tail.b
        traj.c[restart:] = tail.c
        traj.d[restart:] = tail.d
        if not tail.pole_events:
            break
        events = list(tail.pole_events)
        traj.pole_events.extend(tail.pole_events)
    return traj


def simulate(model, t0: float, t1: float,
             cfg: IntegratorConfig = IntegratorConfig(),
             method: str = "both",
             oracle_cfg: Optional[OracleConfig] = None,
             output_grid_points: Optional[int] = None,
             reanchor: bool = False) -> SimulationResult:
    """Run the factorized method, the oracle, or both, on a shared grid.

    Convention is fixed by the model: schrodinger (i U' = H U) for the PT
    model, flow (U' = H U, oracle started at i*I) for the spin model.
    Cross-method error is the max-entry distance on the common grid,
    skipping grid points invalidated by a pole.
    """
    if method not in ("factorized", "oracle", "both"):
        raise ValueError(f"unknown method {method!r}")
    if isinstance(model, PTModelParams):
        model_tag, convention = "pt", "schrodinger"
    elif isinstance(model, SpinModelParams):
        model_tag, convention = "spin", "flow"
    else:
        raise TypeError(f"unknown model type {type(model).__name__}")

    if output_grid_points is None:
        output_grid_points = max(2, int(round((t1 - t0) / 1e-3)) + 1)
    times = np.linspace(t0, t1, output_grid_points)

    oracle_series = None
    if method in ("oracle", "both"):
        ocfg = oracle_cfg or OracleConfig(convention=convention)
        if ocfg.convention != convention:
            ocfg = OracleConfig(step=ocfg.step, scheme=ocfg.scheme,
                                convention=convention)
        runner = (time_ordered_product if ocfg.scheme == "midpoint_exponential"
                  else rk4_direct)
        oracle_series = runner(model, t0, t1, ocfg, times=times)

    trajectory = None
    factor_series = None
    pole_events: List[PoleEvent] = []
    if method in ("factorized", "both"):
        if reanchor and oracle_series is not None:
            trajectory = _integrate_with_reanchor(
                model, t0, t1, cfg, times, oracle_series, model_tag)
        else:
            integrate = (integrate_factors_pt if model_tag == "pt"
                         else integrate_factors_spin)
            trajectory = integrate(model, t0, t1, cfg, times=times)
        pole_events = list(trajectory.pole_events)
        factor_series = series_from_trajectory(trajectory)

    primary = factor_series if factor_series is not None else oracle_series
    res_rows, det_rows = _residual_rows(primary, model)

    cross_rows = np.full(len(times), np.nan)
    if factor_series is not None and oracle_series is not None:
        uf = _series_arrays(factor_series)
        uo = _series_arrays(oracle_series)
        gap = np.max(np.abs(uf - uo), axis=(1, 2))
        cross_rows = np.where(np.all(np.isfinite(uf.reshape(len(times), -1)),
                                     axis=1), gap, np.nan)
    cross_max = float(np.nanmax(cross_rows)) if np.any(np.isfinite(cross_rows)) else 0.0

    report = ResidualReport(
        max_schrodinger_residual=float(np.nanmax(res_rows)),
        max_det_error=float(np.nanmax(det_rows)),
        max_cross_method_error=cross_max,
    )
    return SimulationResult(times=times, trajectory=trajectory,
                            factorized=factor_series, oracle=oracle_series,
                            report=report, pole_events=pole_events,
                            residual_rows=res_rows, det_err_rows=det_rows,
                            cross_rows=cross_rows)
