"""Non-Hermitian spin-k/2 blocks of the soft-mode moment hierarchy.

The time evolution of the k-th order bosonic operators is generated by a
(k+1) x (k+1) non-Hermitian matrix acting on the maximum-S^2 spin sector,

    H(k) = -(kappa k / 2)(1 - gamma) - g^2 omega0 Sx
           + (g^2 - 2) i omega0 Sy - 2 kappa gamma Sy^2,

with S = k/2.  The spin-up variant substitutes g^2 -> -g^2 and the zero-eta
("coherent") variant sets g = 0, which is diagonal in the Sy eigenbasis.  The
union of these spectra over k is the spectrum of the reduced Liouvillian, so
stability of every moment order reduces to dense diagonalization of small
matrices.  This module also carries the closed-form stability boundaries, the
k=2 Routh-Hurwitz coefficients, and the small-gamma perturbative abscissa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import INFINITE, ModelParams, QubitBranch, _Infinite

#: branch tag for the zero-eta block (reduced Hamiltonian with a coherent
#: drive instead of squeezing); equivalent to setting g=0 in the spin block.
COHERENT = "coherent"

#: abscissa margin below which a block is classified marginal (and treated
#: as unstable by the boundary bisection, so classification is deterministic)
STABILITY_TOL = 1e-10

_BOUNDARY_KINDS = ("gc1", "gc2_down", "gc2_up", "gc_infinity")


def _branch_key(branch) -> str:
    if branch == COHERENT:
        return COHERENT
    return QubitBranch(branch).value


@dataclass(frozen=True)
class SpinBlock:
    """Dense (k+1) x (k+1) block for the k-th order operators."""

    k: int
    branch: str
    matrix: np.ndarray
    params: ModelParams

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)

    def abscissa(self) -> float:
        return float(self.eigenvalues().real.max())


@dataclass(frozen=True)
class StabilityVerdict:
    k: int
    branch: str
    abscissa: float
    stable: bool
    marginal: bool


def spin_matrices(k: int):
    """Spin-S matrices (Sx, Sy, Sz) with S = k/2 in the descending Sz basis."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    s = k / 2.0
    dim = k + 1
    m = s - np.arange(dim)
    splus = np.zeros((dim, dim), dtype=complex)
    for i in range(1, dim):
        mm = m[i]
        splus[i - 1, i] = math.sqrt(s * (s + 1) - mm * (mm + 1))
    sminus = splus.conj().T
    sx = (splus + sminus) / 2.0
    sy = (splus - sminus) / 2.0j
    sz = np.diag(m).astype(complex)
    return sx, sy, sz


def effective_hamiltonian(k: int, branch, params: ModelParams) -> SpinBlock:
    """Build the spin-k/2 block for the given qubit branch.

    branch is QubitBranch.DOWN / .UP or the string COHERENT (zero-eta block,
    i.e. g = 0).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    key = _branch_key(branch)
    if key == "down":
        gsq = params.g**2
    elif key == "up":
        gsq = -params.g**2
    else:
        gsq = 0.0
    sx, sy, _ = spin_matrices(k)
    om = params.omega0
    kap = params.kappa
    gam = params.gamma
    h = (-kap * k / 2.0 * (1.0 - gam)) * np.eye(k + 1, dtype=complex)
    h -= gsq * om * sx
    h += (gsq - 2.0) * 1j * om * sy
    h -= 2.0 * kap * gam * (sy @ sy)
    return SpinBlock(k=k, branch=key, matrix=h, params=params)


def stability(k: int, branch, params: ModelParams,
              tol: float = STABILITY_TOL) -> StabilityVerdict:
    """Classify the k-th block by its spectral abscissa (max real part)."""
    block = effective_hamiltonian(k, branch, params)
    absc = block.abscissa()
    return StabilityVerdict(k=k, branch=block.branch, abscissa=absc,
                            stable=absc < -tol, marginal=abs(absc) <= tol)


def analytic_boundary(kind: str, gamma: float, kappa_over_omega0: float):
    """Closed-form stability boundaries.

    kind is one of "gc1" (k=1, equal to the mean-field g_c), "gc2_down",
    "gc2_up" (k=2 boundaries of the two qubit branches) or "gc_infinity"
    (classical k->infinity bound).  At gamma=0 the gc2 kinds return their
    limits: gc2_down -> gc1 and gc2_up -> INFINITE.
    """
    if kind not in _BOUNDARY_KINDS:
        raise ValueError(f"unknown boundary kind {kind!r}")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma out of [0,1]: {gamma}")
    kap = kappa_over_omega0
    if kind == "gc1":
        return math.sqrt(1.0 + kap**2 / 4.0)
    if kind == "gc_infinity":
        return math.sqrt(kap * (1.0 - gamma))
    if gamma == 0.0:
        return math.sqrt(1.0 + kap**2 / 4.0) if kind == "gc2_down" else INFINITE
    root = math.sqrt(1.0 - gamma)
    inner = math.sqrt(1.0 + gamma + gamma * kap**2 * (1.0 + gamma)**2 / 2.0)
    sign = -1.0 if kind == "gc2_down" else +1.0
    return math.sqrt(root / gamma * (inner + sign * root))


class RouthHurwitzK2(NamedTuple):
    a0: float
    a1: float
    a2: float
    stable: bool


def routh_hurwitz_k2(branch, gamma: float, g: float,
                     kappa_over_omega0: float) -> RouthHurwitzK2:
    """Cubic characteristic coefficients of the k=2 block and the criterion.

    For the monic cubic l^3 + a2 l^2 + a1 l + a0 all roots have negative real
    parts iff a0, a1, a2 > 0 and a2*a1 - a0 > 0.  Coefficients are given in
    units omega0 = 1 with kappa = kappa_over_omega0.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma out of [0,1]: {gamma}")
    kap = kappa_over_omega0
    h = g * g * (1.0 if QubitBranch(branch) is QubitBranch.DOWN else -1.0)
    a2 = (3.0 + gamma) * kap
    a1 = (3.0 - gamma) * (1.0 + gamma) * kap**2 - 4.0 * (h - 1.0)
    a0 = (1.0 - gamma) * (1.0 + gamma)**2 * kap**3 \
        - 4.0 * (gamma * h * h / 2.0 + (1.0 - gamma) * (h - 1.0)) * kap
    stable = a0 > 0 and a1 > 0 and a2 > 0 and a2 * a1 - a0 > 0
    return RouthHurwitzK2(a0=a0, a1=a1, a2=a2, stable=stable)


def perturbative_abscissa(k: int, gamma: float, g: float,
                          kappa_over_omega0: float) -> float:
    """Leading-order (in gamma) largest real-part eigenvalue of the k block.

    k * (-kappa/2 + sqrt(g^2 - 1) + kappa*gamma*(k-1)*(g^2-2)^2 / (8(g^2-1))),
    valid on the g > 1 branch of the square root (omega0 = 1 units).
    """
    if g <= 1.0:
        raise ValueError(f"perturbative abscissa requires g > 1, got g={g}")
    kap = kappa_over_omega0
    gsq = g * g
    return k * (-kap / 2.0 + math.sqrt(gsq - 1.0)
                + kap * gamma * (k - 1) * (gsq - 2.0)**2 / (8.0 * (gsq - 1.0)))


def zero_eta_spectrum(k: int, gamma: float, kappa: float,
                      omega0: float) -> np.ndarray:
    """Exact spectrum of the zero-eta block, diagonal in the Sy basis.

    Returns the k+1 values -kappa*k/2*(1-gamma) - 2i*omega0*My
    - 2*kappa*gamma*My^2 for My = -k/2 ... k/2.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    my = -k / 2.0 + np.arange(k + 1)
    return (-kappa * k / 2.0 * (1.0 - gamma)
            - 2j * omega0 * my - 2.0 * kappa * gamma * my**2)


def _abscissa(k: int, branch, gamma: float, g: float, kap: float) -> float:
    params = ModelParams(omega0=1.0, kappa=kap, gamma=gamma, g=g, eta=INFINITE)
    return effective_hamiltonian(k, branch, params).abscissa()


def critical_coupling(k: int, branch, gamma: float, kappa_over_omega0: float,
                      tol_g: float = 1e-8, g_max: float = 50.0):
    """Bisect the stability boundary g_c^(k) of one spin block.

    Brackets start from the closed forms (gc_infinity is a global lower bound
    for gamma > 0; gc1 bounds the spin-down cascade; gc2_up bounds the even
    spin-up cascade), expanding upward when needed.  Marginal points count as
    unstable, so the predicate is a deterministic step function.  Returns
    INFINITE when no instability is found below g_max (e.g. any k for
    branch=up at gamma=0, or k=1 up at any gamma).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma out of [0,1]: {gamma}")
    kap = kappa_over_omega0
    branch = QubitBranch(branch)

    def unstable(g):
        return _abscissa(k, branch, gamma, g, kap) >= -STABILITY_TOL

    gc_inf = analytic_boundary("gc_infinity", gamma, kap)
    gc1 = analytic_boundary("gc1", gamma, kap)
    lo = gc_inf * (1.0 - 1e-6) if gamma > 0.0 else 0.0
    if unstable(lo):
        if lo == 0.0 or unstable(0.0):
            raise RuntimeError(
                f"no stable region found for k={k}, branch={branch.value}, "
                f"gamma={gamma}: predicate non-monotone or block unstable at g=0")
        lo = 0.0

    if branch is QubitBranch.DOWN:
        hi = gc1 * (1.0 + 1e-6)
    else:
        gc2u = analytic_boundary("gc2_up", gamma, kap)
        hi = gc2u * (1.0 + 1e-6) if not isinstance(gc2u, _Infinite) \
            else 2.0 * max(gc1, 1.0)
    while not unstable(hi):
        hi *= 2.0
        if hi > g_max:
            return INFINITE
    while hi - lo > tol_g:
        mid = 0.5 * (lo + hi)
        if unstable(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def min_unstable_k(params: ModelParams, k_max: int, parity: str,
                   branch) -> int | None:
    """Smallest unstable order of the given parity up to k_max, or None."""
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    start = 2 if parity == "even" else 1
    for k in range(start, k_max + 1, 2):
        if not stability(k, branch, params).stable:
            return k
    return None
