"""Single-photon (Fock state) loading of an emitter at a field antinode.

For an incident one-photon wave packet with temporal waveform ``xi(t)``
(normalised, ``int |xi|^2 dt = 1``) the relevant expectation values obey::

    dc/dt = -gamma c + sqrt(Gamma) conj(xi)
    dz/dt = -Gamma (1 + z) + 2 sqrt(Gamma) (xi c + conj(xi c))

with ``c = <g,1|sigma_+|g,0>`` and ``z = <g,1|sigma_z|g,1>``.  The reflected
photon flux is ``|xi|^2 + Gamma (1 + z) / 2 - 2 sqrt(Gamma) Re(xi c)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from ._quad import integrate_window
from .dynamics import check_uniform
from .errors import IntegrationError
from .params import QubitParams
from .waveform import linear_stages

# Grid extent around the turn-off at t = 0, in units of tau (before) and 1/Gamma (after).
INPUT_SPAN = 15.0
EMISSION_SPAN = 20.0


@dataclass(frozen=True, eq=False)
class PhotonWaveform:
    t: np.ndarray
    xi: np.ndarray
    stages: np.ndarray | None = None

    def stage_values(self) -> np.ndarray:
        return self.stages if self.stages is not None else linear_stages(self.xi)

    def norm(self) -> float:
        f = np.abs(self.xi) ** 2
        return integrate_window(self.t, f, self.t[0], 0.0) + integrate_window(self.t, f, 0.0, self.t[-1])


@dataclass(frozen=True, eq=False)
class FockTrajectory:
    t: np.ndarray
    c: np.ndarray
    s_z: np.ndarray
    xi: np.ndarray

    @property
    def p_e(self) -> np.ndarray:
        return 0.5 * (1.0 + self.s_z)


def fock_grid(tau: float, p: QubitParams, dt: float | None = None) -> np.ndarray:
    """Grid over ``[-15 tau, 20 / Gamma]`` with ``t = 0`` on a grid point."""
    if dt is None:
        dt = min(tau, p.t1) / 1000.0
    n_before = int(math.ceil(INPUT_SPAN * tau / dt - 1e-9))
    step = INPUT_SPAN * tau / n_before
    n_after = int(math.ceil(EMISSION_SPAN / p.gamma_r / step - 1e-9))
    return step * np.arange(-n_before, n_after + 1)


def xi_exp_rising(tau: float, grid: np.ndarray) -> PhotonWaveform:
    """``xi(t) = sqrt(2/tau) exp(t/tau)`` for ``t <= 0``, zero afterwards."""
    t = np.asarray(grid, dtype=float)
    peak = math.sqrt(2.0 / tau)
    tol = 1e-9 * (t[1] - t[0])
    xi = np.where(t <= tol, peak * np.exp(np.minimum(t, 0.0) / tau), 0.0).astype(complex)

    left, right = t[:-1], t[1:]
    mid = 0.5 * (left + right)
    on = mid < 0.0
    stages = np.stack(
        [np.where(on, peak * np.exp(np.minimum(x, 0.0) / tau), 0.0) for x in (left, mid, right)],
        axis=1,
    ).astype(complex)
    return PhotonWaveform(t, xi, stages)


@numba.njit(cache=True, nogil=True)
def _fock_rk4(dt, stages, gamma, gamma_r):
    n = stages.shape[0] + 1
    c = np.empty(n, np.complex128)
    z = np.empty(n, np.float64)
    c[0] = 0.0
    z[0] = -1.0
    g = np.sqrt(gamma_r)
    h2 = 0.5 * dt
    for j in range(n - 1):
        x0 = stages[j, 0]
        xm = stages[j, 1]
        x1 = stages[j, 2]
        cj = c[j]
        zj = z[j]

        k1c = -gamma * cj + g * x0.conjugate()
        k1z = -gamma_r * (1.0 + zj) + 4.0 * g * (x0 * cj).real

        c2 = cj + h2 * k1c
        z2 = zj + h2 * k1z
        k2c = -gamma * c2 + g * xm.conjugate()
        k2z = -gamma_r * (1.0 + z2) + 4.0 * g * (xm * c2).real

        c3 = cj + h2 * k2c
        z3 = zj + h2 * k2z
        k3c = -gamma * c3 + g * xm.conjugate()
        k3z = -gamma_r * (1.0 + z3) + 4.0 * g * (xm * c3).real

        c4 = cj + dt * k3c
        z4 = zj + dt * k3z
        k4c = -gamma * c4 + g * x1.conjugate()
        k4z = -gamma_r * (1.0 + z4) + 4.0 * g * (x1 * c4).real

        c[j + 1] = cj + dt / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
        z[j + 1] = zj + dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
    return c, z


def evolve_fock(xi: PhotonWaveform, p: QubitParams) -> FockTrajectory:
    """Integrate from the ground state at the first grid point."""
    dt = check_uniform(xi.t, module="fock")
    stages = np.ascontiguousarray(xi.stage_values(), dtype=np.complex128)
    c, z = _fock_rk4(dt, stages, p.gamma, p.gamma_r)
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(z))):
        raise IntegrationError("non-finite state during integration", module="fock")
    return FockTrajectory(xi.t, c, z, xi.xi)


def fock_output_flux(traj: FockTrajectory, p: QubitParams) -> np.ndarray:
    g = math.sqrt(p.gamma_r)
    return (
        np.abs(traj.xi) ** 2
        + p.gamma_r * traj.p_e
        - 2.0 * g * (traj.xi * traj.c).real
    )


def fock_output_flux_closed_form(t: np.ndarray, tau: float, p: QubitParams) -> np.ndarray:
    """Analytic reflected flux for the exponentially rising waveform (t != 0)."""
    t = np.asarray(t, dtype=float)
    loaded = fock_efficiency(tau, p)
    before = (1.0 - loaded) * (2.0 / tau) * np.exp(2.0 * np.minimum(t, 0.0) / tau)
    after = loaded * p.gamma_r * np.exp(-p.gamma_r * np.maximum(t, 0.0))
    return np.where(t < 0.0, before, after)


def fock_efficiency(tau: float, p: QubitParams) -> float:
    """Closed-form loading efficiency for the exponentially rising waveform."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    g, gr = p.gamma, p.gamma_r
    return 4.0 * gr / (tau * (g + 1.0 / tau) * (gr + 2.0 / tau))


def fock_efficiency_numeric(tau: float, p: QubitParams, dt: float | None = None) -> float:
    """Emitted photons after turn-off over incident photons, from the ODE."""
    grid = fock_grid(tau, p, dt)
    xi = xi_exp_rising(tau, grid)
    traj = evolve_fock(xi, p)
    f_out = fock_output_flux(traj, p)
    emitted = integrate_window(grid, f_out, 0.0, grid[-1])
    return emitted / xi.norm()


def fock_tau_opt(p: QubitParams) -> float:
    return math.sqrt(2.0 / (p.gamma * p.gamma_r))
