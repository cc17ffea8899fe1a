"""Dissipative quantum Rabi model with bosonic damping and dephasing.

Library layout: model (parameters), operators (truncated matrices),
liouvillian (vectorized generators and solvers), meanfield, hierarchy
(non-Hermitian spin-k/2 blocks and stability boundaries), moments
(normal-ordered algebra and the block-triangular generator), analytics
(closed-form steady-state results), cli (scan driver).
"""

__version__ = "0.1.0"

from .model import INFINITE, ModelParams, QubitBranch, make_params
from .operators import (BasisMismatchError, FockTruncation,
                        SparseComplexOperator, ladder_ops, pauli_ops,
                        rabi_hamiltonian, reduced_hamiltonian, tensor)
from .liouvillian import (DegenerateSteadyStateError, DensityMatrix,
                          SolverConvergenceError, SolverOptions, SpectralEdge,
                          SteadySolution, Superoperator, adjoint_apply,
                          expectation, lindblad_superop, rabi_liouvillian,
                          reduced_liouvillian, spectrum_edge, steady_state,
                          trace_preservation_defect, truncation_drift)
from .meanfield import (MeanFieldState, MeanFieldTrajectory, mf_evolve,
                        mf_rhs, mf_steady_branches)
from .hierarchy import (COHERENT, SpinBlock, StabilityVerdict,
                        analytic_boundary, critical_coupling,
                        effective_hamiltonian, min_unstable_k,
                        perturbative_abscissa, routh_hurwitz_k2,
                        spin_matrices, stability, zero_eta_spectrum)
from .moments import (MomentGenerator, MomentInstabilityError,
                      MomentPolynomial, adjoint_action, moment_generator,
                      multiply_and_normal_order, steady_moments)
from .analytics import (BoundaryDivergenceError, SigmaZPrediction,
                        sigma_z_infinity, v2_steady, y_param)
