"""Closed-form steady-state results of the soft-mode limit.

The k=2 steady moments of the reduced models, the quadrature variance
parameters y = <(a - a^dag)^2>, and the eta->infinity qubit magnetization

    <sigma_z>_s = gamma (y_down - y_up) / (-2(1-gamma) + gamma (y_down + y_up))

which is valid for g below the k=2 spin-down boundary and saturates at
exactly 1 beyond it (for gamma > 0).  At gamma = 0 the magnetization limit is
0 for every coupling.
"""

from __future__ import annotations

from dataclasses import dataclass

from .hierarchy import analytic_boundary
from .model import ModelParams, QubitBranch

#: evaluations closer to the k=2 boundary than this raise instead of
#: returning huge floats, so scans show a gap rather than a spike artifact
BOUNDARY_GUARD = 1e-10


class BoundaryDivergenceError(ZeroDivisionError):
    """Closed form evaluated at or beyond its stability boundary."""


def normalization(branch, params: ModelParams) -> float:
    """Normalization constant of the k=2 steady solution (N_down or N_up).

    N = 8(1-gamma)(1 + (1+gamma)^2 kappa^2/(4 omega0^2)) -+ 8(1-gamma)g^2
        - 4 gamma g^4, with -+ = - for DOWN and + for UP.  Vanishes exactly
    at the corresponding k=2 boundary (DOWN); stays positive for UP below it.
    """
    branch = QubitBranch(branch)
    gam, g = params.gamma, params.g
    kap2 = (params.kappa / params.omega0) ** 2
    sign = -1.0 if branch is QubitBranch.DOWN else +1.0
    return (8.0 * (1.0 - gam) * (1.0 + (1.0 + gam) ** 2 * kap2 / 4.0)
            + sign * 8.0 * (1.0 - gam) * g**2 - 4.0 * gam * g**4)


def _check_stable(branch: QubitBranch, params: ModelParams) -> float:
    n = normalization(branch, params)
    if branch is QubitBranch.DOWN:
        gc2 = analytic_boundary("gc2_down", params.gamma,
                                params.kappa / params.omega0)
        if n <= 0.0 or abs(params.g - gc2) < BOUNDARY_GUARD:
            raise BoundaryDivergenceError(
                f"k=2 moments diverge at g={params.g} (boundary gc2={gc2:.9g})")
    elif n <= 0.0:
        raise BoundaryDivergenceError(
            f"spin-up k=2 normalization not positive at g={params.g}")
    return n


def v2_steady(branch, params: ModelParams):
    """Steady (<aa>, <a^dag a>, <a^dag a^dag>) of the reduced model.

    Closed form of the 3x3 linear system; the UP branch is the DOWN result
    under g^2 -> -g^2.  Valid below the corresponding k=2 boundary.
    """
    branch = QubitBranch(branch)
    n = _check_stable(branch, params)
    gam = params.gamma
    kap = params.kappa / params.omega0
    h = params.g**2 * (1.0 if branch is QubitBranch.DOWN else -1.0)
    aa = (1.0 - gam) * h * (2.0 - h + 1j * kap * (1.0 + gam)) / n
    nbar = (1.0 + gam) * h * h / n
    return aa, complex(nbar), aa.conjugate()


def y_param(branch, params: ModelParams) -> float:
    """Quadrature parameter y = <(a - a^dag)^2> = 2 Re<aa> - 2<n> - 1.

    Evaluates the closed forms y_down = (4g^2/N_down)(1-gamma-g^2) - 1 and
    y_up = -(4g^2/N_up)(1-gamma+g^2) - 1; equals -1 in vacuum and diverges
    to -infinity as g approaches the spin-down k=2 boundary.
    """
    branch = QubitBranch(branch)
    n = _check_stable(branch, params)
    gam, g = params.gamma, params.g
    if branch is QubitBranch.DOWN:
        return 4.0 * g**2 * (1.0 - gam - g**2) / n - 1.0
    return -4.0 * g**2 * (1.0 - gam + g**2) / n - 1.0


@dataclass(frozen=True)
class SigmaZPrediction:
    """eta->infinity steady <sigma_z> with its ingredients.

    ``saturated`` marks the g >= gc2_down region (gamma > 0) where the value
    is pinned at exactly 1 and y_down/n_down are no longer meaningful (None).
    Note the formula ingredients stay finite up to gc2_up, but the saturated
    value 1 applies on the whole g >= gc2_down range.
    """

    value: float
    y_down: float | None
    y_up: float
    n_down: float
    n_up: float
    saturated: bool


def sigma_z_infinity(params: ModelParams) -> SigmaZPrediction:
    """Steady-state qubit magnetization in the soft-mode limit.

    gamma = 0: returns 0 for every coupling (damping and dephasing act
    identically on first-order operators, so the branches balance exactly).
    gamma > 0, g < gc2_down: evaluates the closed form.
    gamma > 0, g >= gc2_down: returns 1 with saturated=True.
    """
    gam = params.gamma
    n_up = normalization(QubitBranch.UP, params)
    y_up = y_param(QubitBranch.UP, params)
    n_down = normalization(QubitBranch.DOWN, params)

    if gam == 0.0:
        y_down = None
        try:
            y_down = y_param(QubitBranch.DOWN, params)
        except BoundaryDivergenceError:
            pass
        return SigmaZPrediction(value=0.0, y_down=y_down, y_up=y_up,
                                n_down=n_down, n_up=n_up, saturated=False)

    gc2 = analytic_boundary("gc2_down", gam, params.kappa / params.omega0)
    if params.g >= gc2 - BOUNDARY_GUARD:
        return SigmaZPrediction(value=1.0, y_down=None, y_up=y_up,
                                n_down=n_down, n_up=n_up, saturated=True)

    y_down = y_param(QubitBranch.DOWN, params)
    denom = -2.0 * (1.0 - gam) + gam * (y_down + y_up)
    if denom == 0.0:
        raise ZeroDivisionError(
            "degenerate denominator in the sigma_z closed form "
            f"(gamma={gam}, g={params.g})")
    value = gam * (y_down - y_up) / denom
    return SigmaZPrediction(value=value, y_down=y_down, y_up=y_up,
                            n_down=n_down, n_up=n_up, saturated=False)
