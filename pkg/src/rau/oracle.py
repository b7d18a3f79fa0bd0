"""Independent ground-truth propagators.

Two fixed-step schemes for U' = G H(t) U with G = -i (schrodinger
convention, i U' = H U) or G = +1 (flow convention, U' = H U):

* a midpoint exponential product, U_{k+1} = exp(G h H(t_k + h/2)) U_k --
  every factor is an exact group element, so determinant and Hermitian-case
  unitarity hold to machine precision per step; global error O(h^2);
* classic fixed-step RK4 applied directly to the matrix ODE.

Both are deliberately independent of the factorized construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .models import hamiltonian_at, SpinModelParams
from .pauli_algebra import Complex2x2, exp2, IDENTITY

__all__ = ["OracleConfig", "PropagatorSeries", "time_ordered_product",
           "rk4_direct"]


@dataclass(frozen=True)
class OracleConfig:
    step: float = 1e-4
    scheme: str = "midpoint_exponential"  # | "rk4_direct"
    convention: str = "schrodinger"       # | "flow"

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.scheme not in ("midpoint_exponential", "rk4_direct"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.convention not in ("schrodinger", "flow"):
            raise ValueError(f"unknown convention {self.convention!r}")


@dataclass
class PropagatorSeries:
    times: np.ndarray
    matrices: List[Complex2x2]
    convention: str  # "schrodinger" | "flow"
    source: str      # "factorized" | "oracle"

    def arrays(self) -> np.ndarray:
        """(n, 2, 2) complex array view of the series."""
        return np.array([m.to_array() for m in self.matrices])


def _generator_sign(convention: str) -> complex:
    return -1j if convention == "schrodinger" else 1.0


def default_initial(model, convention: str) -> Complex2x2:
    """U(t0): the identity, except the flow-convention spin ansatz which
    carries an explicit global prefactor i."""
    if convention == "flow" and isinstance(model, SpinModelParams):
        return IDENTITY.scaled(1j)
    return IDENTITY


def _output_times(t0, t1, step):
    n = max(1, int(np.ceil((t1 - t0) / step - 1e-12)))
    return np.linspace(t0, t1, n + 1)


def time_ordered_product(model, t0: float, t1: float,
                         cfg: OracleConfig = OracleConfig(),
                         u0: Optional[Complex2x2] = None,
                         times=None) -> PropagatorSeries:
    """Midpoint exponential-product realization of the time-ordered
    exponential.  If `times` is given, the matrices are recorded at those
    points (each inter-point span is subdivided to honor cfg.step)."""
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    G = _generator_sign(cfg.convention)
    record = np.asarray(times, dtype=float) if times is not None \
        else _output_times(t0, t1, cfg.step)
    u = u0 if u0 is not None else default_initial(model, cfg.convention)
    out = [u]
    t = record[0]
    for target in record[1:]:
        n_sub = max(1, int(np.ceil((target - t) / cfg.step - 1e-12)))
        h = (target - t) / n_sub
        for k in range(n_sub):
            mid = t + (k + 0.5) * h
            u = exp2(hamiltonian_at(model, mid).scaled(G * h)) @ u
        t = target
        out.append(u)
    return PropagatorSeries(times=record, matrices=out,
                            convention=cfg.convention, source="oracle")


def rk4_direct(model, t0: float, t1: float,
               cfg: OracleConfig = OracleConfig(),
               u0: Optional[Complex2x2] = None,
               times=None) -> PropagatorSeries:
    """Classic fixed-step RK4 on the matrix ODE U' = G H(t) U."""
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    G = _generator_sign(cfg.convention)
    record = np.asarray(times, dtype=float) if times is not None \
        else _output_times(t0, t1, cfg.step)
    u = (u0 if u0 is not None else default_initial(model, cfg.convention)).to_array()

    def f(t, m):
        return G * hamiltonian_at(model, t).to_array() @ m

    out = [Complex2x2.from_array(u)]
    t = record[0]
    for target in record[1:]:
        n_sub = max(1, int(np.ceil((target - t) / cfg.step - 1e-12)))
        h = (target - t) / n_sub
        for k in range(n_sub):
            tk = t + k * h
            k1 = f(tk, u)
            k2 = f(tk + h / 2, u + h / 2 * k1)
            k3 = f(tk + h / 2, u + h / 2 * k2)
            k4 = f(tk + h, u + h * k3)
            u = u + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = target
        out.append(Complex2x2.from_array(u))
    return PropagatorSeries(times=record, matrices=out,
                            convention=cfg.convention, source="oracle")
