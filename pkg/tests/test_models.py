import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rau.models import (Constant, CouplingDomainError, ExponentialDecay,
                        Polynomial, PTModelParams, PTPhase, Sinusoid,
                        SpinModelParams, StaticPTParams, Tabulated,
                        coupling_from_dict, coupling_to_dict, eigen_analysis,
                        hamiltonian_at, pt_apply, pt_phase,
                        spin_reality_check, static_hamiltonian)

P_SWAP = np.array([[0, 1], [1, 0]])


# --- couplings --------------------------------------------------------------

def test_coupling_evaluation():
    assert Constant(2.5)(7.0) == 2.5
    assert Sinusoid(2.0, 3.0, 0.5)(0.7) == pytest.approx(2.0 * math.cos(3.0 * 0.7 + 0.5))
    assert Polynomial([1, 2, 3])(2.0) == pytest.approx(1 + 4 + 12)
    assert ExponentialDecay(2.0, 0.5)(1.0) == pytest.approx(2.0 * math.exp(-0.5))
    tab = Tabulated([0, 1, 2], [0, 2, 0])
    assert tab(0.5) == pytest.approx(1.0)


def test_tabulated_validation():
    with pytest.raises(ValueError):
        Tabulated([0], [1])
    with pytest.raises(ValueError):
        Tabulated([0, 0], [1, 2])
    with pytest.raises(CouplingDomainError):
        Tabulated([0, 1], [1, 2])(1.5)


def test_coupling_dict_round_trip():
    for c in (Constant(1.5), Sinusoid(1, 2, 0.3), Polynomial([0, 1, 2]),
              ExponentialDecay(2, 1), Tabulated([0, 1], [3, 4])):
        c2 = coupling_from_dict(coupling_to_dict(c))
        assert c2 == c


def test_coupling_from_dict_rejects_garbage():
    with pytest.raises(ValueError):
        coupling_from_dict({"kind": "fourier"})
    with pytest.raises(ValueError):
        coupling_from_dict({"value": 1})


def test_scaled_preserves_kind():
    for c in (Constant(3.0), Sinusoid(1, 2, 0.3), Polynomial([1, 2]),
              ExponentialDecay(2, 1), Tabulated([0, 1], [3, 4])):
        s = c.scaled(0.5)
        assert type(s) is type(c)
        assert s(0.7) == pytest.approx(0.5 * c(0.7))


# --- static model -----------------------------------------------------------

def test_static_hamiltonian_pure_coupling():
    h = static_hamiltonian(StaticPTParams(0, 1, 0.7)).to_array()
    assert np.allclose(h, [[0, 1], [1, 0]])


def test_static_hamiltonian_entries():
    h = static_hamiltonian(StaticPTParams(1, 2, math.pi / 6)).to_array()
    assert np.allclose(h, [[0.8660254037844387 + 0.5j, 2],
                           [2, 0.8660254037844387 - 0.5j]], atol=1e-12)


def test_eigen_unbroken_values():
    # independent oracle: numpy diagonalization agrees with the closed form
    p = StaticPTParams(1, 2, math.pi / 6)
    es = eigen_analysis(p)
    assert es.lambda_plus == pytest.approx(2.8025170768881473, abs=1e-12)
    assert es.lambda_minus == pytest.approx(-1.0704662693192697, abs=1e-12)
    w = sorted(np.linalg.eigvals(static_hamiltonian(p).to_array()).real)
    assert w[1] == pytest.approx(es.lambda_plus.real, abs=1e-10)
    assert w[0] == pytest.approx(es.lambda_minus.real, abs=1e-10)


def test_eigen_hermitian_limit():
    es = eigen_analysis(StaticPTParams(1, 2, 0.0))
    assert es.lambda_plus == pytest.approx(3)
    assert es.lambda_minus == pytest.approx(-1)


def test_eigen_broken_pair():
    es = eigen_analysis(StaticPTParams(2, 1, math.pi / 2))
    assert es.lambda_plus == pytest.approx(1j * math.sqrt(3), abs=1e-12)
    assert es.lambda_minus == pytest.approx(-1j * math.sqrt(3), abs=1e-12)
    assert not es.pt_eigenstates


def test_eigenvector_residuals_both_phases():
    for p in (StaticPTParams(1, 2, math.pi / 6), StaticPTParams(2, 1, math.pi / 2),
              StaticPTParams(2.5, 0.4, 1.0)):
        h = static_hamiltonian(p).to_array()
        es = eigen_analysis(p)
        assert np.linalg.norm(h @ es.psi_plus - es.lambda_plus * es.psi_plus) < 1e-10
        assert np.linalg.norm(h @ es.psi_minus - es.lambda_minus * es.psi_minus) < 1e-10


def test_eigen_s_zero_diagonal():
    es = eigen_analysis(StaticPTParams(1.5, 0.0, 0.3))
    h = static_hamiltonian(StaticPTParams(1.5, 0.0, 0.3)).to_array()
    assert np.linalg.norm(h @ es.psi_plus - es.lambda_plus * es.psi_plus) < 1e-12
    assert np.linalg.norm(h @ es.psi_minus - es.lambda_minus * es.psi_minus) < 1e-12


def test_pt_phase_tags():
    assert pt_phase(StaticPTParams(1, 2, math.pi / 6)) is PTPhase.UNBROKEN
    assert pt_phase(StaticPTParams(2, 1, math.pi / 2)) is PTPhase.BROKEN
    th = 0.8
    assert pt_phase(StaticPTParams(1, math.sin(th), th)) is PTPhase.EXCEPTIONAL


def test_pt_apply_basics():
    assert np.allclose(pt_apply([1, 0]), [0, 1])
    v = np.array([0.3 + 0.4j, -1.1 + 0.2j])
    assert np.allclose(pt_apply(pt_apply(v)), v)


def test_pt_action_on_eigenstates():
    # computed behavior in the unbroken phase: psi_+- are PT eigenstates
    # with eigenvalues +1 / -1 (not swapped into each other)
    es = eigen_analysis(StaticPTParams(1, 2, math.pi / 6))
    assert np.allclose(pt_apply(es.psi_plus), es.psi_plus, atol=1e-12)
    assert np.allclose(pt_apply(es.psi_minus), -es.psi_minus, atol=1e-12)


@given(st.floats(0, 3), st.floats(0, 3), st.floats(0, math.pi))
def test_static_pt_symmetry(r, s, th):
    h = static_hamiltonian(StaticPTParams(r, s, th)).to_array()
    assert np.array_equal(P_SWAP @ np.conj(h) @ P_SWAP, h)


# --- time-dependent models --------------------------------------------------

def test_pt_hamiltonian_free_limit():
    m = PTModelParams(nu=1.5, kappa=Constant(0.0), lam=Constant(0.0))
    assert np.allclose(hamiltonian_at(m, 0.3).to_array(), 1.5 * np.eye(2))


def test_pt_hamiltonian_entries():
    m = PTModelParams(nu=0.0, kappa=Constant(0.3), lam=Constant(0.5))
    assert np.allclose(hamiltonian_at(m, 2.0).to_array(),
                       [[0.3j, 0.5], [0.5, -0.3j]])


def test_spin_hamiltonian_entries():
    m = SpinModelParams(omega=1.0, alpha_coeff=2.0, kappa=Constant(0.4))
    assert np.allclose(hamiltonian_at(m, 0.0).to_array(),
                       [[-0.9, -0.2j], [-0.2j, -0.1]])


def test_pt_hamiltonian_trace():
    m = PTModelParams(nu=0.7, kappa=Sinusoid(1, 2), lam=ExponentialDecay(1, 1))
    for t in np.linspace(0, 3, 7):
        assert hamiltonian_at(m, t).trace() == pytest.approx(2 * 0.7, abs=1e-14)


def test_time_dependent_pt_symmetry_even_couplings():
    # kappa, lambda even in t => P conj(H(-t)) P = H(t)
    m = PTModelParams(nu=0.4, kappa=Sinusoid(0.6, 2.0), lam=Sinusoid(1.0, 1.0))
    for t in np.linspace(-2, 2, 9):
        h_t = hamiltonian_at(m, t).to_array()
        h_mt = hamiltonian_at(m, -t).to_array()
        assert np.allclose(P_SWAP @ np.conj(h_mt) @ P_SWAP, h_t, atol=1e-14)


def test_spin_reality_condition():
    assert spin_reality_check(2, 1)
    assert not spin_reality_check(1, 1)
    # static spin eigenvalues -(omega +- sqrt(l^2 - k^2))/2 at (1, 2, 1)
    h = -0.5 * (np.eye(2) + 2 * np.diag([1, -1])
                + 1j * np.array([[0, 1], [1, 0]]))
    w = sorted(np.linalg.eigvals(h).real)
    assert w[0] == pytest.approx(-(1 + math.sqrt(3)) / 2, abs=1e-12)
    assert w[1] == pytest.approx(-(1 - math.sqrt(3)) / 2, abs=1e-12)


def test_tabulated_coupling_out_of_range_propagates():
    m = PTModelParams(nu=0.0, kappa=Tabulated([0, 1], [1, 1]),
                      lam=Constant(0.0))
    with pytest.raises(CouplingDomainError):
        hamiltonian_at(m, 2.0)
