"""Physical parameters and unit conventions shared by all other modules.

All rates are expressed in units of the oscillator frequency omega0 (the
natural choice here is omega0 = 1).  The qubit frequency is Omega =
eta * omega0 and the absolute coupling is lambda = g * sqrt(omega0 * Omega) / 2,
so the dimensionless pair (g, eta) plus (omega0, kappa, gamma) fixes the model
completely.  The soft-mode limit eta -> infinity is represented by the
distinct sentinel ``INFINITE`` rather than ``float('inf')`` so that reduced
models are selected explicitly and float infinities never leak into
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class _Infinite:
    """Singleton marker for the soft-mode / thermodynamic limit."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "infinite"

    def __reduce__(self):  # keep singleton identity through pickling
        return (_Infinite, ())


INFINITE = _Infinite()


class QubitBranch(str, Enum):
    """Qubit sector selecting the reduced oscillator model.

    DOWN is the sigma_z = -1 sector (squeezing term with a minus sign); UP is
    obtained from it by the substitution g^2 -> -g^2.
    """

    DOWN = "down"
    UP = "up"


@dataclass(frozen=True)
class ModelParams:
    """Validated parameter record for the dissipative Rabi model.

    Attributes
    ----------
    omega0 : float
        Oscillator frequency, > 0.
    kappa : float
        Total dissipation rate, >= 0.
    gamma : float
        Non-Gaussianity parameter in [0, 1]; weight of dephasing vs damping.
    g : float
        Dimensionless coupling, >= 0.
    eta : float or INFINITE
        Frequency ratio Omega/omega0 (> 0), or INFINITE for the reduced
        soft-mode models.
    """

    omega0: float
    kappa: float
    gamma: float
    g: float
    eta: float | _Infinite

    @property
    def eta_is_infinite(self) -> bool:
        return isinstance(self.eta, _Infinite)

    @property
    def qubit_frequency(self) -> float:
        """Omega = eta * omega0.  Raises for the soft-mode limit."""
        if self.eta_is_infinite:
            raise ValueError("qubit frequency is undefined for eta=infinite")
        return self.eta * self.omega0

    @property
    def coupling_lambda(self) -> float:
        """Absolute coupling lambda = g * sqrt(omega0 * Omega) / 2."""
        return coupling_from_g(self.g, self.omega0, self.eta)

    @property
    def kappa_over_omega0(self) -> float:
        return self.kappa / self.omega0

    def with_g(self, g: float) -> "ModelParams":
        """Copy of the record with a different coupling (for scans)."""
        return make_params(self.omega0, self.kappa, self.gamma, g, self.eta)


def make_params(omega0: float, kappa: float, gamma: float, g: float,
                eta: float | _Infinite | str) -> ModelParams:
    """Validate fields and build a ModelParams record.

    ``eta`` accepts a positive float, the INFINITE sentinel, or the strings
    "inf"/"infinite" (CLI convenience).

    Raises
    ------
    ValueError
        If any field is out of range; the message names the offending field.
    """
    if isinstance(eta, str):
        if eta.lower() in ("inf", "infinite", "infinity"):
            eta = INFINITE
        else:
            eta = float(eta)
    if not omega0 > 0:
        raise ValueError(f"omega0 must be > 0, got {omega0}")
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma out of [0,1]: {gamma}")
    if g < 0:
        raise ValueError(f"g must be >= 0, got {g}")
    if not isinstance(eta, _Infinite):
        eta = float(eta)
        if not eta > 0:
            raise ValueError(f"eta must be > 0 or infinite, got {eta}")
    return ModelParams(float(omega0), float(kappa), float(gamma), float(g), eta)


def coupling_from_g(g: float, omega0: float, eta: float | _Infinite) -> float:
    """lambda = g * sqrt(omega0 * Omega) / 2 with Omega = eta * omega0."""
    if isinstance(eta, _Infinite):
        raise ValueError("lambda is undefined (divergent) for eta=infinite")
    return g * math.sqrt(omega0 * eta * omega0) / 2.0


def g_from_coupling(lam: float, omega0: float, eta: float | _Infinite) -> float:
    """Inverse map g = 2*lambda / sqrt(omega0 * Omega)."""
    if isinstance(eta, _Infinite):
        raise ValueError("g is undefined for eta=infinite with finite lambda")
    return 2.0 * lam / math.sqrt(omega0 * eta * omega0)
