"""Truncated Fock-space and qubit operators as tagged sparse complex matrices.

Operators carry a basis tag ("qubit", "fock:N", "qubit*fock:N") and arithmetic
refuses to mix tags, which catches dimension/ordering bugs at the call site.
Matrices are assembled from coordinate triplets and compiled to CSR on first
use.  Composite operators such as (a + a^dag)^2 are formed by multiplying the
truncated factors, so all downstream objects (Hamiltonians, Liouvillians) are
internally consistent at any Nmax; the usual truncation artifact is that
[a, a^dag] = 1 fails on the top Fock level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .model import INFINITE, ModelParams, QubitBranch

QUBIT = "qubit"


class BasisMismatchError(ValueError):
    """Raised when combining operators with different basis tags."""


def fock_tag(nmax: int) -> str:
    return f"fock:{nmax}"


def kron_tag(tag_a: str, tag_b: str) -> str:
    return f"{tag_a}*{tag_b}"


@dataclass(frozen=True)
class FockTruncation:
    """Number of retained oscillator levels (>= 2)."""

    nmax: int

    def __post_init__(self):
        if self.nmax < 2:
            raise ValueError(f"nmax must be >= 2, got {self.nmax}")

    @property
    def tag(self) -> str:
        return fock_tag(self.nmax)

    def scaled(self, factor: float) -> "FockTruncation":
        """Truncation enlarged to ceil(factor * nmax), for drift checks."""
        return FockTruncation(int(np.ceil(factor * self.nmax)))


class SparseComplexOperator:
    """Complex sparse matrix with a basis tag.

    Supports +, -, scalar *, @ (operator product), .dag(), and conversion to
    CSR/dense.  Construction sums duplicate (row, col) entries.
    """

    def __init__(self, matrix, basis: str):
        coo = sp.coo_matrix(matrix, dtype=complex)
        coo.sum_duplicates()
        if coo.shape[0] != coo.shape[1]:
            raise ValueError(f"operators must be square, got shape {coo.shape}")
        self._coo = coo
        self._csr = None
        self.basis = basis
        self.dim = coo.shape[0]

    @classmethod
    def from_triplets(cls, dim, rows, cols, vals, basis: str):
        m = sp.coo_matrix((np.asarray(vals, complex),
                           (np.asarray(rows), np.asarray(cols))),
                          shape=(dim, dim))
        return cls(m, basis)

    def to_csr(self) -> sp.csr_matrix:
        if self._csr is None:
            self._csr = self._coo.tocsr()
        return self._csr

    def to_dense(self) -> np.ndarray:
        return self.to_csr().toarray()

    @property
    def nnz(self) -> int:
        return self._coo.nnz

    def dag(self) -> "SparseComplexOperator":
        return SparseComplexOperator(self.to_csr().conj().T, self.basis)

    def _check(self, other: "SparseComplexOperator"):
        if not isinstance(other, SparseComplexOperator):
            raise TypeError(f"expected SparseComplexOperator, got {type(other)}")
        if other.basis != self.basis:
            raise BasisMismatchError(
                f"basis mismatch: {self.basis!r} vs {other.basis!r}")

    def __add__(self, other):
        self._check(other)
        return SparseComplexOperator(self.to_csr() + other.to_csr(), self.basis)

    def __sub__(self, other):
        self._check(other)
        return SparseComplexOperator(self.to_csr() - other.to_csr(), self.basis)

    def __mul__(self, scalar):
        return SparseComplexOperator(self.to_csr() * complex(scalar), self.basis)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    def __matmul__(self, other):
        self._check(other)
        return SparseComplexOperator(self.to_csr() @ other.to_csr(), self.basis)

    def hermiticity_defect(self) -> float:
        """max |A - A^dag| entry; 0.0 for exactly Hermitian construction."""
        d = (self.to_csr() - self.to_csr().conj().T).tocoo()
        return float(np.abs(d.data).max()) if d.nnz else 0.0

    def __repr__(self):
        return (f"SparseComplexOperator(dim={self.dim}, basis={self.basis!r}, "
                f"nnz={self.nnz})")


def identity_op(dim: int, basis: str) -> SparseComplexOperator:
    return SparseComplexOperator(sp.identity(dim, dtype=complex, format="coo"),
                                 basis)


def ladder_ops(trunc: FockTruncation):
    """Truncated (a, a^dag, n) on the Fock basis |0..Nmax-1>.

    a[m-1, m] = sqrt(m); n = a^dag a is exactly diag(0..Nmax-1).
    """
    nmax = trunc.nmax
    tag = trunc.tag
    vals = np.sqrt(np.arange(1, nmax, dtype=float))
    a = SparseComplexOperator.from_triplets(
        nmax, np.arange(nmax - 1), np.arange(1, nmax), vals, tag)
    adag = a.dag()
    n = adag @ a
    return a, adag, n


def pauli_ops():
    """(sx, sy, sz, sp, sm) on the qubit basis with |up> first, sz=diag(1,-1)."""
    sx = SparseComplexOperator(np.array([[0, 1], [1, 0]], complex), QUBIT)
    sy = SparseComplexOperator(np.array([[0, -1j], [1j, 0]], complex), QUBIT)
    sz = SparseComplexOperator(np.array([[1, 0], [0, -1]], complex), QUBIT)
    sp_ = SparseComplexOperator(np.array([[0, 1], [0, 0]], complex), QUBIT)
    sm = SparseComplexOperator(np.array([[0, 0], [1, 0]], complex), QUBIT)
    return sx, sy, sz, sp_, sm


def tensor(a: SparseComplexOperator, b: SparseComplexOperator) -> SparseComplexOperator:
    """Kronecker product with row-major index convention idx = i_a*dim_b + i_b."""
    return SparseComplexOperator(sp.kron(a.to_csr(), b.to_csr(), format="coo"),
                                 kron_tag(a.basis, b.basis))


def rabi_hamiltonian(params: ModelParams, trunc: FockTruncation) -> SparseComplexOperator:
    """(Omega/2) sz + lambda sx (a + a^dag) + omega0 n on qubit*fock.

    Requires finite eta; the soft-mode limit is served by
    ``reduced_hamiltonian``.
    """
    if params.eta_is_infinite:
        raise ValueError("eta is infinite: use reduced_hamiltonian for the "
                         "soft-mode models")
    a, adag, n = ladder_ops(trunc)
    sx, _, sz, _, _ = pauli_ops()
    i2 = identity_op(2, QUBIT)
    ifock = identity_op(trunc.nmax, trunc.tag)
    omega_q = params.qubit_frequency
    lam = params.coupling_lambda
    return (0.5 * omega_q) * tensor(sz, ifock) \
        + lam * tensor(sx, a + adag) \
        + params.omega0 * tensor(i2, n)


def reduced_hamiltonian(branch: QubitBranch, params: ModelParams,
                        trunc: FockTruncation) -> SparseComplexOperator:
    """Soft-mode oscillator Hamiltonian -+ (omega0 g^2/4)(a+a^dag)^2 + omega0 n.

    branch=DOWN carries the minus sign; branch=UP substitutes g^2 -> -g^2.
    """
    branch = QubitBranch(branch)
    a, adag, n = ladder_ops(trunc)
    x = a + adag
    sign = -1.0 if branch is QubitBranch.DOWN else +1.0
    return (sign * params.omega0 * params.g**2 / 4.0) * (x @ x) \
        + params.omega0 * n
