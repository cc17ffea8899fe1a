"""Normal-ordered bosonic operator algebra and the moment-evolution generator.

Polynomials in a, a^dag are kept in normal order, keyed by (m, n) for
(a^dag)^m a^n.  Products are reordered exactly with
a^n (a^dag)^p = sum_j j! C(n,j) C(p,j) (a^dag)^(p-j) a^(n-j), so all
structural zeros are algebraic identities, not thresholds.  Applying the
adjoint reduced Liouvillian to the monomial basis yields a block-triangular
generator whose k-th diagonal block is similar to the spin-k/2 block of the
hierarchy module -- this is the independent oracle for those spectra -- and
whose bottom-up solve gives every steady moment through a chosen order.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from . import hierarchy
from .model import ModelParams, QubitBranch


class MomentInstabilityError(RuntimeError):
    """Steady moments requested beyond a stability boundary."""

    def __init__(self, order: int, abscissa: float):
        self.order = order
        self.abscissa = abscissa
        super().__init__(
            f"moment order {order} is not stable (spectral abscissa "
            f"{abscissa:+.3e}); its steady value diverges")


class MomentPolynomial:
    """Complex linear combination of normal-ordered monomials (a^dag)^m a^n."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict[tuple[int, int], complex] = {}
        if terms:
            for key, coeff in terms.items():
                if coeff != 0:
                    self.terms[key] = complex(coeff)

    @classmethod
    def monomial(cls, m: int, n: int, coeff: complex = 1.0):
        return cls({(m, n): coeff})

    @classmethod
    def one(cls):
        return cls.monomial(0, 0)

    @classmethod
    def a(cls):
        return cls.monomial(0, 1)

    @classmethod
    def adag(cls):
        return cls.monomial(1, 0)

    @classmethod
    def n(cls):
        return cls.monomial(1, 1)

    def order(self) -> int:
        """Maximal monomial order m+n (0 for the empty polynomial)."""
        return max((m + n for m, n in self.terms), default=0)

    def copy(self):
        return MomentPolynomial(self.terms)

    def __add__(self, other):
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            s = out.get(key, 0.0) + coeff
            if s == 0:
                out.pop(key, None)
            else:
                out[key] = s
        return MomentPolynomial(out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        return MomentPolynomial({k: v * complex(scalar)
                                 for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other):
        """Exact normal-ordered product of two polynomials."""
        out: dict[tuple[int, int], complex] = {}
        for (m1, n1), c1 in self.terms.items():
            for (m2, n2), c2 in other.terms.items():
                c12 = c1 * c2
                for j in range(min(n1, m2) + 1):
                    w = factorial(j) * comb(n1, j) * comb(m2, j)
                    key = (m1 + m2 - j, n1 + n2 - j)
                    s = out.get(key, 0.0) + w * c12
                    if s == 0:
                        out.pop(key, None)
                    else:
                        out[key] = s
        return MomentPolynomial(out)

    def dagger(self):
        return MomentPolynomial({(n, m): v.conjugate()
                                 for (m, n), v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, MomentPolynomial) and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "MomentPolynomial(0)"
        parts = [f"({v:g})*ad^{m} a^{n}"
                 for (m, n), v in sorted(self.terms.items())]
        return "MomentPolynomial(" + " + ".join(parts) + ")"


_FACTORS = {
    "a": MomentPolynomial.a,
    "adag": MomentPolynomial.adag,
    "n": MomentPolynomial.n,
}


def multiply_and_normal_order(p: MomentPolynomial, factor: str,
                              side: str) -> MomentPolynomial:
    """Multiply by a, adag or n on the given side and renormal-order."""
    try:
        f = _FACTORS[factor]()
    except KeyError:
        raise ValueError(f"factor must be one of {sorted(_FACTORS)}, "
                         f"got {factor!r}") from None
    if side == "left":
        return f @ p
    if side == "right":
        return p @ f
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def _commutator(p: MomentPolynomial, q: MomentPolynomial) -> MomentPolynomial:
    return p @ q - q @ p


def _reduced_hamiltonian_poly(branch: QubitBranch,
                              params: ModelParams) -> MomentPolynomial:
    # -+ (omega0 g^2/4)(a + adag)^2 + omega0 n, exact in the untruncated algebra
    x = MomentPolynomial.a() + MomentPolynomial.adag()
    sign = -1.0 if branch is QubitBranch.DOWN else +1.0
    return (sign * params.omega0 * params.g**2 / 4.0) * (x @ x) \
        + params.omega0 * MomentPolynomial.n()


def adjoint_action(p: MomentPolynomial, branch,
                   params: ModelParams) -> MomentPolynomial:
    """Apply the adjoint reduced Liouvillian to a polynomial, exactly.

    L+(A) = i[H, A] + kappa(1-gamma) (ad A a - {n, A}/2)
                   + kappa gamma     (n A n - {n^2, A}/2).
    The output order never exceeds the input order; extra terms appear only
    at orders k-2, k-4, ...
    """
    branch = QubitBranch(branch)
    h = _reduced_hamiltonian_poly(branch, params)
    out = 1j * _commutator(h, p)
    a = MomentPolynomial.a()
    adag = MomentPolynomial.adag()
    nop = MomentPolynomial.n()
    rate_damp = params.kappa * (1.0 - params.gamma)
    if rate_damp != 0.0:
        damp = adag @ p @ a - 0.5 * (nop @ p + p @ nop)
        out = out + rate_damp * damp
    rate_deph = params.kappa * params.gamma
    if rate_deph != 0.0:
        nsq = nop @ nop
        deph = nop @ p @ nop - 0.5 * (nsq @ p + p @ nsq)
        out = out + rate_deph * deph
    return out


def monomial_basis(max_order: int) -> list[tuple[int, int]]:
    """(m, n) keys ordered by total order ascending, then m ascending.

    Order-1 slice is (a, adag); order-2 slice is (aa, adag a, adag adag),
    matching the vectors v1 and v2 of the low-order evolution matrices.
    """
    return [(m, k - m) for k in range(max_order + 1) for m in range(k + 1)]


@dataclass(frozen=True)
class MomentGenerator:
    """Matrix of the adjoint Liouvillian on the monomial basis.

    d<basis[i]>/dt = sum_j matrix[i, j] <basis[j]>; block-triangular with
    order-k rows coupling only to orders k, k-2, k-4, ...
    """

    max_order: int
    branch: str
    basis: tuple[tuple[int, int], ...]
    matrix: np.ndarray
    params: ModelParams

    def block_indices(self, k: int) -> slice:
        start = k * (k + 1) // 2
        return slice(start, start + k + 1)

    def diagonal_block(self, k: int) -> np.ndarray:
        idx = self.block_indices(k)
        return self.matrix[idx, idx]


def moment_generator(max_order: int, branch,
                     params: ModelParams) -> MomentGenerator:
    """Assemble the generator through the given maximal order (>= 1)."""
    if max_order < 1:
        raise ValueError(f"max_order must be >= 1, got {max_order}")
    branch = QubitBranch(branch)
    basis = monomial_basis(max_order)
    index = {key: i for i, key in enumerate(basis)}
    gen = np.zeros((len(basis), len(basis)), dtype=complex)
    for i, key in enumerate(basis):
        image = adjoint_action(MomentPolynomial.monomial(*key), branch, params)
        for target, coeff in image.terms.items():
            gen[i, index[target]] = coeff
    return MomentGenerator(max_order=max_order, branch=branch.value,
                           basis=tuple(basis), matrix=gen, params=params)


def steady_moments(max_order: int, branch,
                   params: ModelParams) -> dict[tuple[int, int], complex]:
    """Steady-state <(a^dag)^m a^n> for all m+n <= max_order.

    Solves the block-triangular linear system bottom-up starting from the
    order-0 constant 1.  Raises MomentInstabilityError naming the first
    unstable order -- which is exactly how the instability cascade shows up
    in the moment language.
    """
    branch = QubitBranch(branch)
    for k in range(1, max_order + 1):
        verdict = hierarchy.stability(k, branch, params)
        if not verdict.stable:
            raise MomentInstabilityError(k, verdict.abscissa)
    gen = moment_generator(max_order, branch, params)
    values = np.zeros(len(gen.basis), dtype=complex)
    values[0] = 1.0
    for k in range(1, max_order + 1):
        idx = gen.block_indices(k)
        lower = slice(0, idx.start)
        rhs = -gen.matrix[idx, lower] @ values[lower]
        values[idx] = np.linalg.solve(gen.matrix[idx, idx], rhs)
    return dict(zip(gen.basis, values))
