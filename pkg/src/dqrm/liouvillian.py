"""Vectorized Lindblad superoperators, steady states, and spectral edges.

Vectorization is column-stacking, vec(A X B) = (B^T kron A) vec(X), so the
generator of rho -> -i[H, rho] + sum_k rate_k D[L_k](rho) is

    M = -i (I kron H - H^T kron I)
        + sum_k rate_k [ conj(L_k) kron L_k - (I kron L_k^dag L_k)/2
                         - ((L_k^dag L_k)^T kron I)/2 ].

Both model Liouvillians have a weak Z2 symmetry whose conjugation action is
diagonal in this basis (sigma_z (-1)^n for the full Rabi model, (-1)^n for
the reduced oscillator), so the matrix splits into parity-even/odd sectors.
Steady states live in the even sector; the solver exploits the split when the
metadata provides it and probes the odd sector separately so the spectral-gap
estimate and the mandatory degeneracy check cover the full spectrum.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import ModelParams, QubitBranch
from .operators import (FockTruncation, SparseComplexOperator,
                        ladder_ops, pauli_ops, rabi_hamiltonian,
                        reduced_hamiltonian, tensor, identity_op, QUBIT)

logger = logging.getLogger(__name__)

#: superoperators whose trace-functional column sums exceed this are rejected
TRACE_AUDIT_TOL = 1e-12

#: matrices at or below this size are diagonalized densely instead of ARPACK
_DENSE_CUTOFF = 500


class SolverConvergenceError(RuntimeError):
    """Eigensolver ran out of its iteration budget."""


class DegenerateSteadyStateError(RuntimeError):
    """Steady-state solve found a (near-)degenerate null space.

    Carries the offending eigenvalues and the corresponding vectorized
    candidate states so callers can inspect the manifold.
    """

    def __init__(self, eigenvalues, vectors):
        self.eigenvalues = np.asarray(eigenvalues)
        self.vectors = vectors
        super().__init__(
            "degenerate steady-state manifold: second eigenvalue "
            f"{self.eigenvalues[1]:.3e} within the degeneracy tolerance")


@dataclass
class SolverOptions:
    """Tolerances and knobs shared by the steady-state and edge solvers."""

    tol: float = 1e-10            # residual tolerance for steady states
    degeneracy_tol: float = 1e-9  # gap below which the solve is degenerate
    sigma: float | None = None    # shift for shift-invert (default 0.01*scale)
    ncv: int | None = None        # ARPACK subspace size
    use_symmetry: bool = True     # exploit the parity split when available


@dataclass(frozen=True)
class Superoperator:
    """Sparse matrix acting on column-stacked density matrices."""

    matrix: sp.csr_matrix
    hilbert_dim: int
    model: str
    params: ModelParams | None = None
    trunc: FockTruncation | None = None
    parity: np.ndarray | None = None  # +-1 per Hilbert index, or None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def vec_parity(self) -> np.ndarray | None:
        """+-1 per vectorized index, from the diagonal symmetry action."""
        if self.parity is None:
            return None
        v = self.parity
        return (v[:, None] * v[None, :]).flatten(order="F")


@dataclass(frozen=True)
class DensityMatrix:
    """Dense density matrix with its sanity checks."""

    rho: np.ndarray

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.rho))

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.rho - self.rho.conj().T).max())

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.rho).min())

    def validate(self, trace_tol: float = 1e-10, herm_tol: float = 1e-10,
                 negativity_tol: float = 1e-8) -> None:
        if abs(self.trace() - 1.0) > trace_tol:
            raise ValueError(f"trace deviates from 1 by {self.trace() - 1.0}")
        if self.hermiticity_defect() > herm_tol:
            raise ValueError(
                f"Hermiticity defect {self.hermiticity_defect():.3e}")
        mineig = self.min_eigenvalue()
        if mineig < -negativity_tol:
            raise ValueError(f"negative eigenvalue {mineig:.3e}")


def clip_negative_eigenvalues(dm: DensityMatrix,
                              tol: float = 1e-8) -> DensityMatrix:
    """Project tiny truncation-induced negativity (>= -tol) to zero.

    Logs the clipped weight; larger negativity raises because it signals an
    unconverged truncation rather than roundoff.
    """
    vals, vecs = np.linalg.eigh(dm.rho)
    if vals.min() < -tol:
        raise ValueError(f"eigenvalue {vals.min():.3e} below -{tol}; "
                         "not a truncation-noise clip")
    clipped = float(-vals[vals < 0].sum()) if (vals < 0).any() else 0.0
    if clipped > 0.0:
        logger.info("clipped negative eigenvalue weight %.3e", clipped)
    vals = np.clip(vals, 0.0, None)
    rho = (vecs * vals) @ vecs.conj().T
    rho /= np.trace(rho).real
    return DensityMatrix(rho=rho)


@dataclass(frozen=True)
class SteadySolution:
    """Steady state plus the solver's certificates."""

    rho: DensityMatrix
    residual: float
    gap_estimate: float


@dataclass(frozen=True)
class SpectralEdge:
    """Edge eigenvalues sorted by descending real part, with residuals."""

    eigenvalues: np.ndarray
    residuals: np.ndarray

    def __len__(self):
        return len(self.eigenvalues)

    def contains(self, value: complex, tol: float) -> bool:
        return bool(np.abs(self.eigenvalues - value).min() <= tol)


def trace_indices(d: int) -> np.ndarray:
    """Vectorized indices of the diagonal entries (m, m)."""
    return np.arange(d) * (d + 1)


def trace_preservation_defect(s: Superoperator) -> float:
    """Largest |column sum| of the trace-functional rows."""
    rows = s.matrix[trace_indices(s.hilbert_dim), :]
    colsum = np.asarray(rows.sum(axis=0)).ravel()
    return float(np.abs(colsum).max()) if colsum.size else 0.0


def lindblad_superop(h: SparseComplexOperator,
                     channels: Sequence[tuple[float, SparseComplexOperator]],
                     model: str = "custom",
                     params: ModelParams | None = None,
                     trunc: FockTruncation | None = None,
                     parity: np.ndarray | None = None) -> Superoperator:
    """Assemble the vectorized generator and audit trace preservation.

    Channels are (rate, jump operator) pairs sharing the Hamiltonian's basis
    tag; zero-rate channels are dropped from the assembly.
    """
    d = h.dim
    hc = h.to_csr()
    ident = sp.identity(d, dtype=complex, format="csr")
    m = -1j * (sp.kron(ident, hc) - sp.kron(hc.T, ident))
    for rate, lop in channels:
        if rate < 0:
            raise ValueError(f"channel rate must be >= 0, got {rate}")
        if lop.basis != h.basis:
            raise ValueError(f"basis mismatch: channel {lop.basis!r} vs "
                             f"Hamiltonian {h.basis!r}")
        if rate == 0.0:
            continue
        lc = lop.to_csr()
        ldl = (lc.conj().T @ lc).tocsr()
        m = m + rate * (sp.kron(lc.conj(), lc)
                        - 0.5 * sp.kron(ident, ldl)
                        - 0.5 * sp.kron(ldl.T, ident))
    s = Superoperator(matrix=m.tocsr(), hilbert_dim=d, model=model,
                      params=params, trunc=trunc, parity=parity)
    defect = trace_preservation_defect(s)
    scale = max(1.0, float(np.abs(m.data).max()) if m.nnz else 1.0)
    if defect > TRACE_AUDIT_TOL * scale:
        raise AssertionError(
            f"trace-preservation audit failed: column-sum defect {defect:.3e}")
    return s


def rabi_liouvillian(params: ModelParams, trunc: FockTruncation) -> Superoperator:
    """Full qubit-oscillator generator with damping and dephasing channels."""
    h = rabi_hamiltonian(params, trunc)
    a, adag, n = ladder_ops(trunc)
    i2 = identity_op(2, QUBIT)
    a_full = tensor(i2, a)
    n_full = tensor(i2, n)
    channels = [(params.kappa * (1.0 - params.gamma), a_full),
                (params.kappa * params.gamma, n_full)]
    # weak Z2 action sigma_z (-1)^n is diagonal: +-1 on qubit, (-1)^m on Fock
    fock_par = (-1.0) ** np.arange(trunc.nmax)
    parity = np.concatenate([fock_par, -fock_par])
    return lindblad_superop(h, channels, model="rabi", params=params,
                            trunc=trunc, parity=parity)


def reduced_liouvillian(branch: QubitBranch, params: ModelParams,
                        trunc: FockTruncation) -> Superoperator:
    """Boson-only soft-mode generator for one qubit branch."""
    branch = QubitBranch(branch)
    h = reduced_hamiltonian(branch, params, trunc)
    a, adag, n = ladder_ops(trunc)
    channels = [(params.kappa * (1.0 - params.gamma), a),
                (params.kappa * params.gamma, n)]
    parity = (-1.0) ** np.arange(trunc.nmax)
    return lindblad_superop(h, channels, model=f"reduced:{branch.value}",
                            params=params, trunc=trunc, parity=parity)


def _default_sigma(s: Superoperator, opts: SolverOptions) -> float:
    if opts.sigma is not None:
        return opts.sigma
    if s.params is not None:
        return 0.01 * max(s.params.kappa, s.params.omega0)
    return 0.01


def _eigs_near(matrix: sp.csr_matrix, k: int, sigma: complex,
               ncv: int | None):
    """k eigenpairs nearest sigma; dense fallback below the ARPACK cutoff."""
    n = matrix.shape[0]
    if n <= max(_DENSE_CUTOFF, k + 2):
        vals, vecs = np.linalg.eig(matrix.toarray())
        order = np.argsort(np.abs(vals - sigma))[:k]
        return vals[order], vecs[:, order]
    try:
        vals, vecs = spla.eigs(matrix, k=k, sigma=sigma, which="LM", ncv=ncv)
    except spla.ArpackNoConvergence as exc:
        raise SolverConvergenceError(
            f"shift-invert Arnoldi did not converge: {exc}") from exc
    order = np.argsort(np.abs(vals - sigma))
    return vals[order], vecs[:, order]


def steady_state(s: Superoperator,
                 opts: SolverOptions | None = None) -> SteadySolution:
    """Shift-invert solve for the null vector of a trace-preserving generator.

    Post-processing Hermitizes ((rho + rho^dag)/2) and trace-normalizes; the
    residual ||M vec(rho)||/||vec(rho)|| is certified against opts.tol on the
    full generator.  The gap estimate is the magnitude of the nearest nonzero
    eigenvalue (both parity sectors when the split is available) and the
    solve fails loudly with DegenerateSteadyStateError when that gap is below
    opts.degeneracy_tol.
    """
    opts = opts or SolverOptions()
    m = s.matrix
    d = s.hilbert_dim
    sigma = _default_sigma(s, opts)
    vec_par = s.vec_parity() if opts.use_symmetry else None

    if vec_par is not None:
        even = np.flatnonzero(vec_par > 0)
        odd = np.flatnonzero(vec_par < 0)
        m_even = m[even][:, even]
        vals, vecs = _eigs_near(m_even, 2, sigma, opts.ncv)
        candidates = np.zeros((s.dim, 2), dtype=complex)
        candidates[even, :] = vecs
        gap = float(np.abs(vals[1]))
        if odd.size:
            odd_vals, _ = _eigs_near(m[odd][:, odd], 1, sigma, opts.ncv)
            gap = min(gap, float(np.abs(odd_vals[0])))
    else:
        vals, candidates = _eigs_near(m, 2, sigma, opts.ncv)
        gap = float(np.abs(vals[1]))

    if abs(vals[0]) > max(10 * opts.tol, 1e-8):
        raise SolverConvergenceError(
            f"no eigenvalue near zero: closest is {vals[0]:.3e}; is the "
            "generator trace-preserving?")
    if gap < opts.degeneracy_tol:
        raise DegenerateSteadyStateError(vals[:2], candidates)

    v = candidates[:, 0]
    rho = v.reshape((d, d), order="F")
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr) < 1e-14:
        raise SolverConvergenceError("steady candidate has zero trace")
    rho = rho / tr
    w = rho.flatten(order="F")
    residual = float(np.linalg.norm(m @ w) / np.linalg.norm(w))
    if residual > opts.tol:
        raise SolverConvergenceError(
            f"steady-state residual {residual:.3e} above tolerance {opts.tol}")
    return SteadySolution(rho=DensityMatrix(rho=rho), residual=residual,
                          gap_estimate=gap)


def expectation(rho, a: SparseComplexOperator) -> complex:
    """tr(A rho) for a DensityMatrix (or plain array) and a tagged operator."""
    mat = rho.rho if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if mat.shape != (a.dim, a.dim):
        raise ValueError(f"dimension mismatch: rho {mat.shape} vs operator "
                         f"dim {a.dim}")
    return complex((a.to_csr() @ mat).trace())


def _edge_candidates(matrix: sp.csr_matrix, n_request: int, sigma: complex,
                     ncv: int | None):
    n = matrix.shape[0]
    k = min(n_request, n if n <= _DENSE_CUTOFF else n - 2)
    vals, vecs = _eigs_near(matrix, k, sigma, ncv)
    norms = np.linalg.norm(vecs, axis=0)
    resid = np.linalg.norm(matrix @ vecs - vecs * vals[None, :], axis=0) / norms
    return vals, resid


def spectrum_edge(s: Superoperator, count: int,
                  opts: SolverOptions | None = None,
                  n_request: int | None = None,
                  residual_tol: float = 1e-8) -> SpectralEdge:
    """The count eigenvalues with largest real parts, with residuals.

    Shift-invert targets a point just right of the spectrum near the real
    axis, which resolves the slow (edge) modes; the request size is padded
    well beyond count so sorting by real part is reliable.  Eigenpairs whose
    residual exceeds residual_tol are discarded.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    opts = opts or SolverOptions()
    sigma = _default_sigma(s, opts)
    if n_request is None:
        n_request = max(4 * count, count + 24)
    vec_par = s.vec_parity() if opts.use_symmetry else None

    vals_all, resid_all = [], []
    if vec_par is not None:
        for sector in (np.flatnonzero(vec_par > 0), np.flatnonzero(vec_par < 0)):
            if not sector.size:
                continue
            sub = s.matrix[sector][:, sector]
            vals, resid = _edge_candidates(sub, (n_request + 1) // 2, sigma,
                                           opts.ncv)
            vals_all.append(vals)
            resid_all.append(resid)
    else:
        vals, resid = _edge_candidates(s.matrix, n_request, sigma, opts.ncv)
        vals_all.append(vals)
        resid_all.append(resid)

    vals = np.concatenate(vals_all)
    resid = np.concatenate(resid_all)
    keep = resid <= residual_tol
    vals, resid = vals[keep], resid[keep]
    order = np.lexsort((np.abs(vals.imag), vals.imag, -vals.real))
    vals, resid = vals[order], resid[order]
    return SpectralEdge(eigenvalues=vals[:count], residuals=resid[:count])


def adjoint_apply(lop: SparseComplexOperator, a: SparseComplexOperator,
                  rate: float = 1.0) -> SparseComplexOperator:
    """Adjoint dissipator rate * (L^dag A L - {L^dag L, A}/2)."""
    if lop.basis != a.basis:
        raise ValueError(f"basis mismatch: {lop.basis!r} vs {a.basis!r}")
    ldag = lop.dag()
    ldl = ldag @ lop
    return rate * (ldag @ a @ lop - 0.5 * (ldl @ a + a @ ldl))


@dataclass(frozen=True)
class TruncationDrift:
    """Observable at Nmax and at ceil(factor*Nmax), with the relative drift."""

    value: float
    value_refined: float
    drift: float
    converged: bool


def truncation_drift(observable: Callable[[FockTruncation], float],
                     trunc: FockTruncation, factor: float = 1.3,
                     rel_tol: float = 0.01) -> TruncationDrift:
    """Rerun an observable at an enlarged truncation and report the drift.

    converged means |v(N) - v(N')| / max(|v(N')|, 1e-300) <= rel_tol with
    N' = ceil(factor*N); the CLI refuses to mark rows converged otherwise.
    """
    v1 = float(observable(trunc))
    v2 = float(observable(trunc.scaled(factor)))
    denom = max(abs(v2), 1e-300)
    drift = abs(v1 - v2) / denom
    return TruncationDrift(value=v1, value_refined=v2, drift=drift,
                           converged=drift <= rel_tol)
