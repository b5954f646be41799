"""Optical Bloch equations for a resonantly (or detuned) driven emitter.

With ``s = <sigma_->`` and ``z = <sigma_z>``::

    ds/dt = -(gamma + i delta) s + omega(t) z / 2
    dz/dt = -Gamma (1 + z) - 2 Re(conj(omega(t)) s)

For real ``omega`` these are the usual resonant Bloch equations.  The
conjugate in the population equation keeps ``z`` real and makes the system
covariant under a global drive phase, ``omega -> exp(i phi) omega`` maps
``s -> exp(i phi) s``.  ``delta`` is ``omega_10 - omega_drive``.

Integration is classical fixed-step RK4 on the drive grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import GridError, IntegrationError
from .params import QubitParams
from .waveform import DriveTrace


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    s_minus: np.ndarray
    s_z: np.ndarray

    @property
    def p_e(self) -> np.ndarray:
        return 0.5 * (1.0 + self.s_z)

    def bloch_norm(self) -> np.ndarray:
        """``4 |s|^2 + z^2``, at most 1 for a physical state."""
        return 4.0 * np.abs(self.s_minus) ** 2 + self.s_z**2


def bloch_rhs(s: complex, z: float, omega: complex, p: QubitParams, detuning: float = 0.0) -> tuple[complex, float]:
    ds = -(p.gamma + 1j * detuning) * s + 0.5 * omega * z
    dz = -p.gamma_r * (1.0 + z) - 2.0 * (np.conj(omega) * s).real
    return ds, dz


@numba.njit(cache=True, nogil=True)
def _bloch_rk4(dt, stages, gamma, gamma_r, detuning, s0, z0):
    n = stages.shape[0] + 1
    s = np.empty(n, np.complex128)
    z = np.empty(n, np.float64)
    s[0] = s0
    z[0] = z0
    a = gamma + 1j * detuning
    h2 = 0.5 * dt
    for j in range(n - 1):
        w0 = stages[j, 0]
        wm = stages[j, 1]
        w1 = stages[j, 2]
        sj = s[j]
        zj = z[j]

        k1s = -a * sj + 0.5 * w0 * zj
        k1z = -gamma_r * (1.0 + zj) - 2.0 * (w0.conjugate() * sj).real

        s2 = sj + h2 * k1s
        z2 = zj + h2 * k1z
        k2s = -a * s2 + 0.5 * wm * z2
        k2z = -gamma_r * (1.0 + z2) - 2.0 * (wm.conjugate() * s2).real

        s3 = sj + h2 * k2s
        z3 = zj + h2 * k2z
        k3s = -a * s3 + 0.5 * wm * z3
        k3z = -gamma_r * (1.0 + z3) - 2.0 * (wm.conjugate() * s3).real

        s4 = sj + dt * k3s
        z4 = zj + dt * k3z
        k4s = -a * s4 + 0.5 * w1 * z4
        k4z = -gamma_r * (1.0 + z4) - 2.0 * (w1.conjugate() * s4).real

        s[j + 1] = sj + dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
        z[j + 1] = zj + dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
    return s, z


def check_uniform(t: np.ndarray, module: str = "dynamics") -> float:
    t = np.asarray(t, dtype=float)
    steps = np.diff(t)
    dt = steps.mean()
    if not dt > 0 or np.max(np.abs(steps - dt)) > 1e-9 * dt:
        raise GridError("time grid is not uniform and increasing", code="grid-nonuniform", module=module)
    return float(dt)


def evolve(
    drive: DriveTrace,
    p: QubitParams,
    detuning: float = 0.0,
    initial: tuple[complex, float] = (0.0, -1.0),
) -> Trajectory:
    """Integrate the Bloch equations over the drive grid.

    The default initial state is the ground state, ``s = 0, z = -1``.
    """
    dt = check_uniform(drive.t)
    s0, z0 = complex(initial[0]), float(initial[1])
    if 4.0 * abs(s0) ** 2 + z0**2 > 1.0 + 1e-12:
        raise ValueError("initial state lies outside the Bloch ball")
    stages = np.ascontiguousarray(drive.stage_values(), dtype=np.complex128)
    s, z = _bloch_rk4(dt, stages, p.gamma, p.gamma_r, float(detuning), s0, z0)
    if not (np.all(np.isfinite(s)) and np.all(np.isfinite(z))):
        raise IntegrationError("non-finite state during integration", module="dynamics")
    return Trajectory(drive.t, s, z)


def weak_drive_closed_form(
    tau: float, omega_peak: float, p: QubitParams, duration: float = np.inf
) -> complex:
    """Linear-response ``<sigma_->`` at turn-off for an exponentially rising drive.

    Valid for ``omega_peak << gamma`` (population stays near the ground state).
    A finite ``duration`` accounts for a pulse that switched on ``duration``
    before turn-off from the ground state.
    """
    rate = p.gamma + 1.0 / tau
    return -omega_peak / (2.0 * rate) * -np.expm1(-rate * duration)


def steady_state(omega: complex, p: QubitParams, detuning: float = 0.0) -> tuple[complex, float]:
    """Stationary ``(s, z)`` under a constant drive."""
    a = p.gamma + 1j * detuning
    # s = omega z / (2a);  0 = -Gamma(1 + z) - |omega|^2 z Re(1/a)
    z = -p.gamma_r / (p.gamma_r + abs(omega) ** 2 * (1.0 / a).real)
    return omega * z / (2.0 * a), z
