import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rau.models import Constant, PTModelParams, Sinusoid, SpinModelParams
from rau.oracle import OracleConfig, time_ordered_product
from rau.pauli_algebra import Complex2x2, IDENTITY, exp2, pauli_compose, \
    PauliCoefficients
from rau.propagator import (ChartFailureError, SimulationResult, assemble_pt,
                            assemble_spin, gauss_decompose,
                            schrodinger_residual, series_from_trajectory,
                            simulate)
from rau.riccati import FactorState, IntegratorConfig, integrate_factors_pt


# --- assembly ---------------------------------------------------------------

def test_assemble_identity():
    assert assemble_pt(FactorState(0, 0, 0, 0)).isclose(IDENTITY, 0)


def test_assemble_nilpotent_b():
    u = assemble_pt(FactorState(0, 0.5, 0, 0))
    assert u.isclose(Complex2x2(1, 1j, 0, 1), 1e-15)


def test_assemble_analytic_quarter_pi():
    # the kappa=0, lambda=1 closure at t = pi/4
    s = FactorState(0.0, -0.5 * math.tan(math.pi / 4),
                    -0.25 * math.sin(math.pi / 2),
                    -math.log(math.cos(math.pi / 4)))
    u = assemble_pt(s).to_array()
    r = math.sqrt(0.5)
    expected = np.array([[r, -1j * r], [-1j * r, r]])
    assert np.max(np.abs(u - expected)) <= 1e-12


def test_assemble_spin_prefactor():
    assert assemble_spin(FactorState(0, 0, 0, 0)).isclose(
        IDENTITY.scaled(1j), 1e-15)
    assert assemble_spin(FactorState(1, 0, 0, 0)).isclose(
        IDENTITY.scaled(1j * math.e), 1e-14)


def test_assemble_determinants():
    s = FactorState(0.4, 1.2, -0.7, 0.3)
    assert abs(assemble_pt(s).det() - np.exp(-0.8j)) <= 1e-14
    assert abs(assemble_spin(s).det() + np.exp(0.8)) <= 1e-13


# --- decomposition ----------------------------------------------------------

def test_decompose_identity():
    s = gauss_decompose(IDENTITY)
    assert (s.a, s.b, s.c, s.d) == (0, 0, 0, 0)


def test_decompose_analytic_matrix():
    t = 0.4
    u = Complex2x2(math.cos(t), -1j * math.sin(t),
                   -1j * math.sin(t), math.cos(t))
    s = gauss_decompose(u)
    assert s.a == pytest.approx(0.0, abs=1e-14)
    assert s.b == pytest.approx(-0.5 * math.tan(t), abs=1e-14)
    assert s.c == pytest.approx(-0.25 * math.sin(2 * t), abs=1e-14)
    assert s.d == pytest.approx(-math.log(math.cos(t)), abs=1e-14)


def test_decompose_chart_failure():
    with pytest.raises(ChartFailureError):
        gauss_decompose(Complex2x2(0, 1, -1, 0))


def test_decompose_spin_round_trip():
    s = FactorState(0.3, 0.8, -0.4, 0.2)
    u = assemble_spin(s)
    r = gauss_decompose(u, convention="flow", model_tag="spin")
    for got, want in zip((r.a, r.b, r.c, r.d), (s.a, s.b, s.c, s.d)):
        assert got == pytest.approx(want, abs=1e-12)


@settings(max_examples=200)
@given(st.floats(-1.5, 1.5), st.floats(-3, 3), st.floats(-3, 3),
       st.floats(-3, 3))
def test_round_trip_property(a, b, c, d):
    s = FactorState(a, b, c, d)
    r = gauss_decompose(assemble_pt(s))
    for got, want in zip((r.a, r.b, r.c, r.d), (a, b, c, d)):
        assert got == pytest.approx(want, abs=1e-10)


# --- residuals --------------------------------------------------------------

def test_residual_analytic_closure():
    m = PTModelParams(nu=0.0, kappa=Constant(0.0), lam=Constant(1.0))
    traj = integrate_factors_pt(m, 0.0, 1.0)
    series = series_from_trajectory(traj)
    rep = schrodinger_residual(series, m)
    assert rep.max_schrodinger_residual <= 1e-5  # finite-difference limited
    assert rep.max_det_error <= 1e-10


def test_residual_oracle_series():
    m = PTModelParams(nu=0.5, kappa=Sinusoid(0.3, 1.0), lam=Constant(0.4))
    series = time_ordered_product(m, 0.0, 1.0, OracleConfig(step=1e-3))
    rep = schrodinger_residual(series, m)
    assert rep.max_schrodinger_residual <= 1e-5


def test_residual_zero_hamiltonian():
    m = PTModelParams(nu=0.0, kappa=Constant(0.0), lam=Constant(0.0))
    series = time_ordered_product(m, 0.0, 1.0, OracleConfig(step=1e-2))
    rep = schrodinger_residual(series, m)
    assert rep.max_schrodinger_residual == 0.0


def test_residual_needs_three_points():
    m = PTModelParams(nu=0.0, kappa=Constant(0.0), lam=Constant(1.0))
    series = time_ordered_product(m, 0.0, 1.0, times=[0.0, 1.0])
    with pytest.raises(ValueError):
        schrodinger_residual(series, m)


# --- simulate ---------------------------------------------------------------

def test_simulate_analytic_cross_method():
    m = PTModelParams(nu=1.0, kappa=Constant(0.0), lam=Constant(1.0))
    res = simulate(m, 0.0, 1.4, method="both")
    assert res.cross_method_error <= 1e-6
    # det U = e^{-2it} (tr H = 2 nu = 2)
    dets = np.array([u.det() for u in res.factorized.matrices])
    assert np.max(np.abs(dets - np.exp(-2j * res.times))) <= 1e-8


def test_simulate_pole_run():
    m = PTModelParams(nu=0.0, kappa=Constant(0.0), lam=Constant(1.0))
    res = simulate(m, 0.0, 2.0, method="both")
    assert len(res.pole_events) == 1
    ev = res.pole_events[0]
    assert ev.t_lo < math.pi / 2 < ev.t_hi
    # factorized series is invalidated past the bracket ...
    invalid = [u is None for u in res.factorized.matrices]
    assert any(invalid)
    # ... while the oracle stays finite with |U22| = cos t
    uo = np.array([u.to_array() for u in res.oracle.matrices])
    assert np.all(np.isfinite(uo.view(float)))
    assert np.max(np.abs(np.abs(uo[:, 1, 1]) - np.abs(np.cos(res.times)))) <= 1e-6


def test_simulate_reanchor_recovers_tail():
    m = PTModelParams(nu=0.0, kappa=Constant(0.0), lam=Constant(1.0))
    res = simulate(m, 0.0, 2.0, method="both", reanchor=True)
    # with re-anchoring the factorized trajectory resumes after the bracket
    tail = res.times > res.pole_events[0].t_hi + 0.01
    assert np.all(np.isfinite(res.trajectory.b[tail]))
    assert res.cross_method_error <= 1e-5


def test_simulate_spin_flow():
    m = SpinModelParams(omega=0.0, alpha_coeff=0.0, kappa=Constant(1.0))
    res = simulate(m, 0.0, 2.0, method="both")
    assert res.cross_method_error <= 1e-6
    assert res.oracle.matrices[0].isclose(IDENTITY.scaled(1j), 0)


def test_simulate_oracle_only():
    m = PTModelParams(nu=0.0, kappa=Constant(0.0), lam=Constant(1.0))
    res = simulate(m, 0.0, 1.0, method="oracle")
    assert res.factorized is None
    assert res.trajectory is None
    assert res.report.max_cross_method_error == 0.0


def test_simulate_rejects_unknown_method():
    m = PTModelParams(nu=0.0, kappa=Constant(0.0), lam=Constant(1.0))
    with pytest.raises(ValueError):
        simulate(m, 0.0, 1.0, method="magnus")


def test_constant_model_matches_closed_form_exponential():
    m = PTModelParams(nu=0.5, kappa=Constant(0.3), lam=Constant(0.8))
    res = simulate(m, 0.0, 1.0, method="factorized",
                   output_grid_points=11)
    h = pauli_compose(PauliCoefficients(0.5, 0.8, 0.0, 0.3j))
    for t, u in zip(res.times, res.factorized.matrices):
        expected = exp2(h.scaled(-1j * t))
        assert (u - expected).max_abs() <= 1e-8
