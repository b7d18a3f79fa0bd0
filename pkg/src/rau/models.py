"""Hamiltonian families and their PT structure.

Three families are covered: the static PT-symmetric matrix
[[r e^{i theta}, s], [s, r e^{-i theta}]], its time-dependent version
nu*I + i*kappa(t)*sigma_z + lambda(t)*sigma_x, and the two-level spin model
-(1/2)[omega*I + alpha*kappa(t)*sigma_z + i*kappa(t)*sigma_x].

Coupling functions are a closed tagged union (not arbitrary callables) so a
simulation config is serializable and a run reproducible.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Union

import numpy as np

from .pauli_algebra import Complex2x2, pauli_compose, PauliCoefficients

__all__ = [
    "CouplingFunction",
    "Constant",
    "Sinusoid",
    "Polynomial",
    "ExponentialDecay",
    "Tabulated",
    "coupling_from_dict",
    "coupling_to_dict",
    "StaticPTParams",
    "PTPhase",
    "EigenSystem",
    "PTModelParams",
    "SpinModelParams",
    "static_hamiltonian",
    "eigen_analysis",
    "pt_phase",
    "pt_apply",
    "hamiltonian_at",
    "spin_reality_check",
]


class CouplingDomainError(ValueError):
    """A tabulated coupling was queried outside its abscissa range."""


# ---------------------------------------------------------------------------
# coupling functions


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, t: float) -> float:
        return self.value

    def scaled(self, s: float) -> "Constant":
        return Constant(s * self.value)


@dataclass(frozen=True)
class Sinusoid:
    """amplitude * cos(angular_frequency * t + phase)"""

    amplitude: float
    angular_frequency: float
    phase: float = 0.0

    def __call__(self, t: float) -> float:
        return self.amplitude * math.cos(self.angular_frequency * t + self.phase)

    def scaled(self, s: float) -> "Sinusoid":
        return Sinusoid(s * self.amplitude, self.angular_frequency, self.phase)


@dataclass(frozen=True)
class Polynomial:
    """sum_k coefficients[k] * t**k (ascending powers)"""

    coefficients: tuple

    def __init__(self, coefficients: Sequence[float]):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in coefficients))

    def __call__(self, t: float) -> float:
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * t + c
        return acc

    def scaled(self, s: float) -> "Polynomial":
        return Polynomial([s * c for c in self.coefficients])


@dataclass(frozen=True)
class ExponentialDecay:
    """amplitude * exp(-rate * t)"""

    amplitude: float
    rate: float

    def __call__(self, t: float) -> float:
        return self.amplitude * math.exp(-self.rate * t)

    def scaled(self, s: float) -> "ExponentialDecay":
        return ExponentialDecay(s * self.amplitude, self.rate)


@dataclass(frozen=True)
class Tabulated:
    """Linear interpolation through >= 2 strictly increasing (t, value) pairs."""

    times: tuple
    values: tuple

    def __init__(self, times: Sequence[float], values: Sequence[float]):
        times = tuple(float(t) for t in times)
        values = tuple(float(v) for v in values)
        if len(times) < 2 or len(times) != len(values):
            raise ValueError("tabulated coupling needs >= 2 (t, value) pairs")
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ValueError("tabulated abscissae must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __call__(self, t: float) -> float:
        if t < self.times[0] or t > self.times[-1]:
            raise CouplingDomainError(
                f"t={t} outside tabulated range [{self.times[0]}, {self.times[-1]}]")
        return float(np.interp(t, self.times, self.values))

    def scaled(self, s: float) -> "Tabulated":
        return Tabulated(self.times, [s * v for v in self.values])


CouplingFunction = Union[Constant, Sinusoid, Polynomial, ExponentialDecay, Tabulated]

_COUPLING_KINDS = {
    "constant": Constant,
    "sinusoid": Sinusoid,
    "polynomial": Polynomial,
    "exponential_decay": ExponentialDecay,
    "tabulated": Tabulated,
}


def coupling_from_dict(d: dict) -> CouplingFunction:
    """Deserialize a coupling from its config form, e.g. {"kind": "constant", "value": 1}."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError(f"coupling must be an object with a 'kind' field, got {d!r}")
    kind = d["kind"]
    if kind not in _COUPLING_KINDS:
        raise ValueError(f"unknown coupling kind {kind!r}")
    kwargs = {k: v for k, v in d.items() if k != "kind"}
    try:
        return _COUPLING_KINDS[kind](**kwargs)
    except TypeError as exc:
        raise ValueError(f"bad fields for coupling kind {kind!r}: {exc}") from exc


def coupling_to_dict(c: CouplingFunction) -> dict:
    for kind, cls in _COUPLING_KINDS.items():
        if isinstance(c, cls):
            d = {"kind": kind}
            for f in c.__dataclass_fields__:
                v = getattr(c, f)
                d[f] = list(v) if isinstance(v, tuple) else v
            return d
    raise TypeError(f"not a coupling function: {c!r}")


# ---------------------------------------------------------------------------
# static PT model


@dataclass(frozen=True)
class StaticPTParams:
    r: float
    s: float
    theta: float


class PTPhase(Enum):
    UNBROKEN = "unbroken"
    BROKEN = "broken"
    EXCEPTIONAL = "exceptional"


@dataclass(frozen=True)
class EigenSystem:
    lambda_plus: complex
    lambda_minus: complex
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    alpha: complex
    pt_eigenstates: bool = True  # False in the broken phase (alpha complex)


def static_hamiltonian(p: StaticPTParams) -> Complex2x2:
    """[[r e^{i theta}, s], [s, r e^{-i theta}]]"""
    return Complex2x2(p.r * cmath.exp(1j * p.theta), p.s,
                      p.s, p.r * cmath.exp(-1j * p.theta))


def pt_phase(p: StaticPTParams, tol: float = 1e-12) -> PTPhase:
    """Classify by the sign of s^2 - r^2 sin^2(theta).

    The tolerance is relative to the larger of the two competing terms (with
    an absolute floor) so classification is scale-free.
    """
    lhs = p.s**2
    rhs = (p.r * math.sin(p.theta))**2
    band = tol * max(lhs, rhs, 1e-300)
    if lhs > rhs + band:
        return PTPhase.UNBROKEN
    if lhs < rhs - band:
        return PTPhase.BROKEN
    return PTPhase.EXCEPTIONAL


def eigen_analysis(p: StaticPTParams) -> EigenSystem:
    """Eigenvalues r cos(theta) +- sqrt(s^2 - r^2 sin^2 theta) and the
    alpha-parameterized eigenvectors, sin(alpha) = (r/s) sin(theta).

    In the broken phase alpha is complex (principal arcsin branch); the
    vectors are still eigenvectors of H but no longer PT eigenstates and the
    result is flagged accordingly.  For s = 0 the matrix is diagonal and the
    eigenvectors are reported directly.
    """
    lam_p = p.r * math.cos(p.theta) + cmath.sqrt(p.s**2 - (p.r * math.sin(p.theta))**2)
    lam_m = p.r * math.cos(p.theta) - cmath.sqrt(p.s**2 - (p.r * math.sin(p.theta))**2)

    if p.s == 0.0:
        psi_p = np.array([1.0 + 0j, 0.0 + 0j])
        psi_m = np.array([0.0 + 0j, 1.0 + 0j])
        # diagonal entries in the same (+, -) order as the formula above
        lam_p = p.r * cmath.exp(1j * p.theta)
        lam_m = p.r * cmath.exp(-1j * p.theta)
        return EigenSystem(lam_p, lam_m, psi_p, psi_m,
                           alpha=complex("nan"), pt_eigenstates=False)

    ratio = (p.r / p.s) * math.sin(p.theta)
    # alpha from (sin, cos) jointly, with cos(alpha) carrying the same
    # square-root branch as the eigenvalues so psi_+ pairs with lambda_+;
    # real alpha in the unbroken phase, complex otherwise
    sin_a = complex(ratio)
    cos_a = cmath.sqrt(p.s**2 - (p.r * math.sin(p.theta))**2) / p.s
    alpha = -1j * cmath.log(cos_a + 1j * sin_a)
    unbroken = abs(alpha.imag) < 1e-14
    norm = 1.0 / cmath.sqrt(2 * cmath.cos(alpha))
    psi_p = norm * np.array([cmath.exp(1j * alpha / 2), cmath.exp(-1j * alpha / 2)])
    psi_m = norm * np.array([cmath.exp(-1j * alpha / 2), -cmath.exp(1j * alpha / 2)])
    return EigenSystem(lam_p, lam_m, psi_p, psi_m, alpha,
                       pt_eigenstates=unbroken)


def pt_apply(v) -> np.ndarray:
    """The antilinear PT operation: swap the two components and conjugate."""
    v = np.asarray(v, dtype=complex)
    return np.array([np.conj(v[1]), np.conj(v[0])])


# ---------------------------------------------------------------------------
# time-dependent models


@dataclass(frozen=True)
class PTModelParams:
    """nu*I + i*kappa(t)*sigma_z + lambda(t)*sigma_x (lambda renamed lam: keyword)."""

    nu: float
    kappa: CouplingFunction
    lam: CouplingFunction


@dataclass(frozen=True)
class SpinModelParams:
    """-(1/2)[omega*I + alpha_coeff*kappa(t)*sigma_z + i*kappa(t)*sigma_x]"""

    omega: float
    alpha_coeff: float
    kappa: CouplingFunction


def hamiltonian_at(model, t: float) -> Complex2x2:
    if isinstance(model, PTModelParams):
        return pauli_compose(PauliCoefficients(
            n=model.nu, x=model.lam(t), y=0.0, z=1j * model.kappa(t)))
    if isinstance(model, SpinModelParams):
        k = model.kappa(t)
        return pauli_compose(PauliCoefficients(
            n=-model.omega / 2, x=-1j * k / 2, y=0.0, z=-model.alpha_coeff * k / 2))
    raise TypeError(f"unknown model type {type(model).__name__}")


def spin_reality_check(lambda_val: float, kappa_val: float) -> bool:
    """Real spin-model spectrum iff |lambda| > |kappa|."""
    return abs(lambda_val) > abs(kappa_val)
