"""Exact 2x2 complex matrix algebra over the Pauli basis.

Everything downstream (Hamiltonians, propagators, BCH identities) lives in
the four-dimensional algebra spanned by I, sigma_x, sigma_y, sigma_z, so a
closed-form exponential and the ladder combinations sigma_pm = sigma_x
+- i*sigma_y (note: *without* the conventional factor 1/2, so
sigma_plus = [[0,2],[0,0]]) are all we ever need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Complex2x2",
    "PauliCoefficients",
    "IDENTITY",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SIGMA_PLUS",
    "SIGMA_MINUS",
    "pauli_compose",
    "pauli_decompose",
    "commutator",
    "exp2",
    "conjugate_by_exp",
]

# below this the sinh(mu)/mu factor of the closed-form exponential switches
# to its even Taylor series to dodge cancellation
_MU_SERIES_CUTOFF = 1e-8


@dataclass(frozen=True)
class Complex2x2:
    """A 2x2 complex matrix, the carrier for Hamiltonians and propagators."""

    m11: complex
    m12: complex
    m21: complex
    m22: complex

    def __post_init__(self):
        for name in ("m11", "m12", "m21", "m22"):
            v = complex(getattr(self, name))
            if not (np.isfinite(v.real) and np.isfinite(v.imag)):
                raise ValueError(f"non-finite matrix entry {name}={v!r}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, a) -> "Complex2x2":
        a = np.asarray(a)
        return cls(a[0, 0], a[0, 1], a[1, 0], a[1, 1])

    def to_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]],
                        dtype=complex)

    def __matmul__(self, other: "Complex2x2") -> "Complex2x2":
        return Complex2x2.from_array(self.to_array() @ other.to_array())

    def __add__(self, other: "Complex2x2") -> "Complex2x2":
        return Complex2x2(self.m11 + other.m11, self.m12 + other.m12,
                          self.m21 + other.m21, self.m22 + other.m22)

    def __sub__(self, other: "Complex2x2") -> "Complex2x2":
        return Complex2x2(self.m11 - other.m11, self.m12 - other.m12,
                          self.m21 - other.m21, self.m22 - other.m22)

    def scaled(self, s: complex) -> "Complex2x2":
        return Complex2x2(s * self.m11, s * self.m12, s * self.m21, s * self.m22)

    def dagger(self) -> "Complex2x2":
        return Complex2x2(np.conj(self.m11), np.conj(self.m21),
                          np.conj(self.m12), np.conj(self.m22))

    def det(self) -> complex:
        return self.m11 * self.m22 - self.m12 * self.m21

    def trace(self) -> complex:
        return self.m11 + self.m22

    def max_abs(self) -> float:
        """Chebyshev (max-entry) norm."""
        return float(np.max(np.abs(self.to_array())))

    def isclose(self, other: "Complex2x2", tol: float) -> bool:
        """Entrywise comparison within an explicit absolute tolerance."""
        return (self - other).max_abs() <= tol


@dataclass(frozen=True)
class PauliCoefficients:
    """Coefficients (n, x, y, z) of a matrix written as n*I + x*sx + y*sy + z*sz."""

    n: complex
    x: complex
    y: complex
    z: complex


IDENTITY = Complex2x2(1, 0, 0, 1)
SIGMA_X = Complex2x2(0, 1, 1, 0)
SIGMA_Y = Complex2x2(0, -1j, 1j, 0)
SIGMA_Z = Complex2x2(1, 0, 0, -1)
SIGMA_PLUS = Complex2x2(0, 2, 0, 0)   # sigma_x + i*sigma_y
SIGMA_MINUS = Complex2x2(0, 0, 2, 0)  # sigma_x - i*sigma_y

ZERO = Complex2x2(0, 0, 0, 0)


def pauli_compose(coeffs: PauliCoefficients) -> Complex2x2:
    """Build n*I + x*sigma_x + y*sigma_y + z*sigma_z."""
    n, x, y, z = coeffs.n, coeffs.x, coeffs.y, coeffs.z
    return Complex2x2(n + z, x - 1j * y, x + 1j * y, n - z)


def pauli_decompose(m: Complex2x2) -> PauliCoefficients:
    """Inverse of :func:`pauli_compose`; exact since the basis is a basis."""
    return PauliCoefficients(
        n=(m.m11 + m.m22) / 2,
        x=(m.m12 + m.m21) / 2,
        y=1j * (m.m12 - m.m21) / 2,
        z=(m.m11 - m.m22) / 2,
    )


def commutator(a: Complex2x2, b: Complex2x2) -> Complex2x2:
    return a @ b - b @ a


def exp2(m: Complex2x2) -> Complex2x2:
    """Closed-form matrix exponential of a 2x2 complex matrix.

    With m = n*I + v.sigma and mu = sqrt(x^2 + y^2 + z^2) (either branch of
    the complex root; the result is branch-independent because cosh and
    sinh(mu)/mu are even):

        exp(m) = e^n * (cosh(mu) * I + sinh(mu)/mu * v.sigma)

    The mu -> 0 limit sinh(mu)/mu -> 1 is taken by series below a cutoff.
    """
    c = pauli_decompose(m)
    mu = np.sqrt(complex(c.x**2 + c.y**2 + c.z**2))
    if abs(mu) < _MU_SERIES_CUTOFF:
        mu2 = mu * mu
        ch = 1.0 + mu2 / 2.0 + mu2 * mu2 / 24.0
        sh_over = 1.0 + mu2 / 6.0 + mu2 * mu2 / 120.0
    else:
        ch = np.cosh(mu)
        sh_over = np.sinh(mu) / mu
    en = np.exp(complex(c.n))
    return pauli_compose(PauliCoefficients(
        n=en * ch,
        x=en * sh_over * c.x,
        y=en * sh_over * c.y,
        z=en * sh_over * c.z,
    ))


def conjugate_by_exp(a: Complex2x2, b: Complex2x2) -> Complex2x2:
    """exp(a) . b . exp(-a); reference check for the terminating BCH pushes."""
    return exp2(a) @ b @ exp2(a.scaled(-1))
