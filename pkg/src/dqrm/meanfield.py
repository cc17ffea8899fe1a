"""Mean-field dynamics and steady branches of the dissipative Rabi model.

With the rescaled order parameter a = <a_op>/sqrt(eta) and the Bloch vector
s = <sigma>, the decoupled equations of motion are

    da/dt  = -(kappa/2 + i omega0) a - i (g omega0 / 2) s_x
    dsx/dt = -eta omega0 s_y
    dsy/dt =  eta omega0 (s_x - g s_z (a + a*))
    dsz/dt =  eta omega0 g s_y (a + a*)

Damping and dephasing act identically on <a_op>, so gamma never enters.  The
fixed points are eta-independent: the normal branch a = s_x = s_y = 0,
s_z = +-1 for g <= g_c = sqrt(1 + kappa^2/(4 omega0^2)) and, beyond it, the
two symmetry-broken branches with s_z = -(g_c/g)^2.  The Bloch norm is a
conserved quantity of the flow and is monitored, not projected, so integrator
trouble shows up as drift instead of being masked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .model import ModelParams


@dataclass(frozen=True)
class MeanFieldState:
    """Order parameter and Bloch vector (a complex, s real)."""

    a: complex
    sx: float
    sy: float
    sz: float

    def bloch_norm(self) -> float:
        return math.sqrt(self.sx**2 + self.sy**2 + self.sz**2)

    def to_array(self) -> np.ndarray:
        return np.array([self.a.real, self.a.imag, self.sx, self.sy, self.sz])

    @classmethod
    def from_array(cls, y) -> "MeanFieldState":
        return cls(a=complex(y[0], y[1]), sx=float(y[2]), sy=float(y[3]),
                   sz=float(y[4]))


def mf_rhs(state: MeanFieldState, params: ModelParams) -> MeanFieldState:
    """Time derivative of the mean-field state (gamma-independent).

    Requires finite eta: the Bloch vector precesses at Omega = eta*omega0,
    so the flow itself has no eta -> infinity limit even though the fixed
    points do.
    """
    if params.eta_is_infinite:
        raise ValueError("mean-field flow needs finite eta; fixed points are "
                         "available from mf_steady_branches for any eta")
    om, kap, g, eta = params.omega0, params.kappa, params.g, params.eta
    x = 2.0 * state.a.real  # a + a*
    da = -(kap / 2.0 + 1j * om) * state.a - 1j * (g * om / 2.0) * state.sx
    dsx = -eta * om * state.sy
    dsy = eta * om * (state.sx - g * state.sz * x)
    dsz = eta * om * g * state.sy * x
    return MeanFieldState(a=da, sx=dsx, sy=dsy, sz=dsz)


def mf_steady_branches(params: ModelParams) -> list[MeanFieldState]:
    """Stable steady branches: normal pair for g <= g_c, broken pair beyond.

    The broken-branch order parameter is
    a = +-(g/2) sqrt(1 - (g_c/g)^4) / (1 - i kappa/(2 omega0)) paired with
    s_x = -+ sqrt(1 - (g_c/g)^4); every returned state zeroes mf_rhs exactly.
    """
    om, kap, g = params.omega0, params.kappa, params.g
    gc = math.sqrt(1.0 + kap**2 / (4.0 * om**2))
    if g <= gc:
        return [MeanFieldState(a=0j, sx=0.0, sy=0.0, sz=-1.0),
                MeanFieldState(a=0j, sx=0.0, sy=0.0, sz=+1.0)]
    root = math.sqrt(1.0 - (gc / g) ** 4)
    sz = -((gc / g) ** 2)
    denom = 1.0 - 1j * kap / (2.0 * om)
    branches = []
    for sign in (+1.0, -1.0):
        a = sign * 0.5 * g / denom * root
        branches.append(MeanFieldState(a=a, sx=-sign * root, sy=0.0, sz=sz))
    return branches


@dataclass(frozen=True)
class MeanFieldTrajectory:
    """Sampled trajectory; states has columns (Re a, Im a, sx, sy, sz)."""

    times: np.ndarray
    states: np.ndarray

    @property
    def a(self) -> np.ndarray:
        return self.states[:, 0] + 1j * self.states[:, 1]

    @property
    def sx(self) -> np.ndarray:
        return self.states[:, 2]

    @property
    def sy(self) -> np.ndarray:
        return self.states[:, 3]

    @property
    def sz(self) -> np.ndarray:
        return self.states[:, 4]

    def bloch_norm(self) -> np.ndarray:
        return np.sqrt((self.states[:, 2:] ** 2).sum(axis=1))

    def state(self, i: int) -> MeanFieldState:
        return MeanFieldState.from_array(self.states[i])

    @property
    def final(self) -> MeanFieldState:
        return self.state(-1)


def mf_evolve(state0: MeanFieldState, t_final: float, dt: float,
              params: ModelParams, rtol: float = 1e-10,
              atol: float = 1e-12) -> MeanFieldTrajectory:
    """Integrate the mean-field flow, sampled every dt.

    Adaptive DOP853 under the hood; dt only sets the output grid.  Raises on
    integrator failure (step-size underflow near singular points).
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if params.eta_is_infinite:
        raise ValueError("mean-field flow needs finite eta")

    def rhs(_t, y):
        d = mf_rhs(MeanFieldState.from_array(y), params)
        return d.to_array()

    times = np.arange(0.0, t_final + 0.5 * dt, dt)
    sol = solve_ivp(rhs, (0.0, float(t_final)), state0.to_array(),
                    t_eval=times, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"mean-field integration failed: {sol.message}")
    return MeanFieldTrajectory(times=sol.t, states=sol.y.T.copy())
