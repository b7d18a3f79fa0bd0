"""Factorized evolution operators for time-dependent PT-symmetric two-level
systems, with an independent time-ordered-exponential oracle."""

from .pauli_algebra import (Complex2x2, PauliCoefficients, pauli_compose,
                            pauli_decompose, commutator, exp2,
                            conjugate_by_exp)
from .models import (Constant, Sinusoid, Polynomial, ExponentialDecay,
                     Tabulated, StaticPTParams, PTPhase, EigenSystem,
                     PTModelParams, SpinModelParams, static_hamiltonian,
                     eigen_analysis, pt_phase, pt_apply, hamiltonian_at,
                     spin_reality_check)
from .riccati import (FactorState, FactorTrajectory, PoleEvent,
                      IntegratorConfig, riccati_rhs_pt, riccati_rhs_spin,
                      integrate_factors_pt, integrate_factors_spin,
                      particular_b0, closed_form_b_proportional,
                      consistency_residuals)
from .makharko import (IntegrabilityCase, lambda_from_kappa, generating_f,
                       integrability_residual, constancy_deviation)
from .oracle import OracleConfig, PropagatorSeries, time_ordered_product, rk4_direct
from .propagator import (ChartFailureError, ResidualReport, SimulationResult,
                         assemble_pt, assemble_spin, gauss_decompose,
                         schrodinger_residual, simulate)

__version__ = "0.1.0"
