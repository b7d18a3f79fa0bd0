import math

import numpy as np
import pytest

from rau.makharko import (BranchError, IntegrabilityCase, constancy_deviation,
                          generating_f, integrability_residual,
                          lambda_from_kappa)
from rau.models import Constant, ExponentialDecay, Sinusoid


# --- lambda from kappa ------------------------------------------------------

def test_lambda_scaling_constant():
    lam = lambda_from_kappa(0.5, Constant(3.0))
    assert lam(0.0) == pytest.approx(4.0)  # 2*0.5*3 / 0.75


def test_lambda_scaling_decoupled():
    lam = lambda_from_kappa(0.0, Constant(5.0))
    assert lam(1.0) == 0.0


def test_lambda_scaling_cosine():
    lam = lambda_from_kappa(0.25, Sinusoid(1.0, 1.0))
    for t in (0.0, 0.3, 1.1):
        assert lam(t) == pytest.approx((8.0 / 15.0) * math.cos(t), abs=1e-15)


def test_lambda_rejects_degenerate_p():
    for p in (1.0, -1.0):
        with pytest.raises(ValueError):
            lambda_from_kappa(p, Constant(1.0))


# --- generating function ----------------------------------------------------

def test_generating_f_values():
    assert generating_f(1.0, 4.0 / 3.0) == pytest.approx(100.0 / 9.0)
    assert generating_f(0.0, 0.0) == 0.0


def test_three_forms_agree():
    # 4(lambda^2+kappa^2) = 4(kappa+p lambda)^2 = 4 kappa^2((1+p^2)/(1-p^2))^2
    # whenever lambda = 2 p kappa / (1 - p^2)
    p, k = 0.5, 1.0
    lam = 2 * p * k / (1 - p * p)
    f1 = generating_f(k, lam)
    f2 = 4 * (k + p * lam) ** 2
    f3 = 4 * k * k * ((1 + p * p) / (1 - p * p)) ** 2
    assert f1 == pytest.approx(100.0 / 9.0)
    assert abs(f1 - f2) <= 1e-12 * abs(f1)
    assert abs(f1 - f3) <= 1e-12 * abs(f1)


@pytest.mark.parametrize("p", [0.1, 0.25, 0.4])
def test_three_forms_agree_pointwise(p):
    kappa = Sinusoid(1.0, 1.0)
    lam = lambda_from_kappa(p, kappa)
    case = IntegrabilityCase.from_kappa(p, kappa)
    for t in np.linspace(0.05, 1.5, 30):
        k, lv = kappa(t), lam(t)
        f1 = generating_f(k, lv)
        f2 = 4 * (k + p * lv) ** 2
        assert abs(f1 - f2) <= 1e-12 * max(abs(f1), 1e-30)
        assert abs(f1 - case.f(t)) <= 1e-12 * max(abs(f1), 1e-30)


# --- integrability residual -------------------------------------------------

def test_residual_constant_case_exact():
    # constant couplings: the derivative term vanishes and
    # (4k^2 - f)/(4l) = -l, so the residual is identically zero
    k, lam, f = Constant(1.0), Constant(2.0), Constant(20.0)
    assert integrability_residual(k, lam, f, "plus", 0.3) == 0.0


def test_residual_proportional_cosine():
    p = 0.25
    kappa = Sinusoid(1.0, 1.0)
    case = IntegrabilityCase.from_kappa(p, kappa)
    r = integrability_residual(case.kappa, case.lam, case.f, "plus", 0.7, 1e-5)
    assert abs(r) <= 1e-6


def test_residual_mismatched_inputs():
    # k=l=f=1: residual = 1 + 0 + 3/4
    r = integrability_residual(Constant(1.0), Constant(1.0), Constant(1.0),
                               "plus", 0.0)
    assert r == pytest.approx(1.75)


@pytest.mark.parametrize("p", [0.1, 0.25, 0.4])
@pytest.mark.parametrize("kappa", [Constant(1.0), Sinusoid(1.0, 1.0),
                                   ExponentialDecay(1.0, 1.0)])
def test_residual_small_for_proportional_family(p, kappa):
    case = IntegrabilityCase.from_kappa(p, kappa)
    for t in np.linspace(0.05, 1.5, 100):
        best = min(abs(integrability_residual(case.kappa, case.lam, case.f,
                                              sign, t))
                   for sign in ("plus", "minus"))
        assert best <= 1e-6


def test_residual_errors():
    with pytest.raises(ZeroDivisionError):
        integrability_residual(Constant(1.0), Constant(0.0), Constant(4.0),
                               "plus", 0.0)
    with pytest.raises(BranchError):
        integrability_residual(Constant(1.0), Constant(1.0), Constant(-1.0),
                               "plus", 0.0)
    with pytest.raises(ValueError):
        integrability_residual(Constant(1.0), Constant(1.0), Constant(1.0),
                               "plus", 0.0, h=0.0)


# --- constancy of the branch ratio ------------------------------------------

def test_constancy_deviation_proportional():
    case = IntegrabilityCase.from_kappa(0.25, Sinusoid(1.0, 1.0))
    dev = constancy_deviation(case, np.linspace(0.05, 1.5, 100))
    assert dev <= 1e-10


def test_constancy_deviation_detects_nonproportional():
    # lambda not proportional to kappa: the branch ratio drifts
    case = IntegrabilityCase(p=0.25, kappa=Sinusoid(1.0, 1.0),
                             lam=Constant(0.5),
                             f=lambda t: generating_f(math.cos(t), 0.5))
    dev = constancy_deviation(case, np.linspace(0.05, 1.5, 50))
    assert dev > 1e-2


def test_case_from_kappa_fields():
    case = IntegrabilityCase.from_kappa(0.5, Constant(3.0))
    assert case.lam(0.0) == pytest.approx(4.0)
    assert case.f(0.0) == pytest.approx(4 * (16 + 9))  # 4(l^2 + k^2) = 100
