"""Integrability condition for the PT-model Riccati equation.

A Riccati equation b' - 2 kappa b + 2 lambda b^2 = -lambda/2 admits a
closed-form general solution when the coefficients satisfy the auxiliary
condition (with a generating function f and either square-root sign)

    lambda + d/dt[ (-2 kappa +- sqrt(f)) / (2 lambda) ]
           + (4 kappa^2 - f) / (4 lambda) = 0.

Dropping the derivative term by demanding (-2 kappa + sqrt(f))/(2 lambda) be
a constant p (p != +-1; the constant is called p here because the letter c
already names a factor function) forces

    f = 4 (kappa + p lambda)^2 = 4 (lambda^2 + kappa^2)
      = 4 kappa^2 ((1 + p^2) / (1 - p^2))^2,

all three equal exactly when lambda = 2 p kappa / (1 - p^2).  The checker
below verifies the condition numerically rather than assuming it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .models import CouplingFunction

__all__ = [
    "IntegrabilityCase",
    "lambda_from_kappa",
    "generating_f",
    "integrability_residual",
    "constancy_deviation",
]


class BranchError(ValueError):
    """f < 0: no real square root for either sign branch."""


@dataclass(frozen=True)
class IntegrabilityCase:
    """A proportional-coupling family lambda = 2 p kappa / (1 - p^2) with its
    generating function (a callable of t, since kappa^2 generally leaves the
    coupling union)."""

    p: float
    kappa: CouplingFunction
    lam: CouplingFunction
    f: Callable[[float], float]
    sign_branch: str = "plus"

    @classmethod
    def from_kappa(cls, p: float, kappa: CouplingFunction,
                   sign_branch: str = "plus") -> "IntegrabilityCase":
        lam = lambda_from_kappa(p, kappa)
        scale = 4.0 * ((1.0 + p * p) / (1.0 - p * p)) ** 2

        def f(t: float) -> float:
            k = kappa(t)
            return scale * k * k

        return cls(p=p, kappa=kappa, lam=lam, f=f, sign_branch=sign_branch)


def lambda_from_kappa(p: float, kappa: CouplingFunction) -> CouplingFunction:
    """The proportional partner coupling 2 p kappa / (1 - p^2)."""
    if abs(p) == 1.0:
        raise ValueError("p = +-1 is excluded (1 - p^2 vanishes)")
    return kappa.scaled(2.0 * p / (1.0 - p * p))


def generating_f(kappa_val: float, lambda_val: float) -> float:
    """The generating function forced by the no-derivative reduction:
    4 (lambda^2 + kappa^2)."""
    return 4.0 * (lambda_val * lambda_val + kappa_val * kappa_val)


def _branch_value(kappa, lam, f, sign: str, t: float) -> float:
    fv = f(t)
    if fv < 0.0:
        raise BranchError(f"f({t}) = {fv} < 0: no real square root")
    root = math.sqrt(fv) if sign == "plus" else -math.sqrt(fv)
    lv = lam(t)
    if lv == 0.0:
        raise ZeroDivisionError(f"lambda({t}) = 0 in the integrability condition")
    return (-2.0 * kappa(t) + root) / (2.0 * lv)


def integrability_residual(kappa, lam, f, sign_branch: str, t: float,
                           h: float = 1e-5) -> float:
    """Evaluate the auxiliary condition at time t; zero iff integrable there.

    The derivative is a central finite difference of width h (O(h^2)
    truncation for smooth couplings).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    g_plus = _branch_value(kappa, lam, f, sign_branch, t + h)
    g_minus = _branch_value(kappa, lam, f, sign_branch, t - h)
    dgdt = (g_plus - g_minus) / (2.0 * h)
    lv = lam(t)
    kv = kappa(t)
    if lv == 0.0:
        raise ZeroDivisionError(f"lambda({t}) = 0 in the integrability condition")
    return lv + dgdt + (4.0 * kv * kv - f(t)) / (4.0 * lv)


def constancy_deviation(case: IntegrabilityCase, times) -> float:
    """Sample standard deviation of (-2 kappa + sqrt(f))/(2 lambda) over a
    grid; ~0 certifies the no-derivative reduction really holds."""
    vals = [_branch_value(case.kappa, case.lam, case.f, case.sign_branch, t)
            for t in times]
    return float(np.std(vals))
