"""Field amplitudes, input-output relation and synthetic digitizer traces.

Coherent amplitudes ``alpha`` are in sqrt(photons/s).  With the sign
convention of :mod:`atomload.dynamics` the reflected field is::

    alpha_out = alpha_in + sqrt(Gamma) <sigma_->

which for a weak resonant drive gives the reflection ``1 - Gamma/gamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import Trajectory, evolve
from .errors import GridError
from .params import QubitParams
from .waveform import DriveTrace


def dbm_to_watts(dbm: float) -> float:
    return 1e-3 * 10.0 ** (dbm / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts / 1e-3)


def rabi_from_power(p_in, k: float):
    p_in = np.asarray(p_in, dtype=float)
    if np.any(p_in < 0):
        raise ValueError("power must be non-negative")
    out = k * np.sqrt(p_in)
    return float(out) if out.ndim == 0 else out


def power_from_rabi(omega, k: float):
    out = (np.abs(np.asarray(omega)) / k) ** 2
    return float(out) if out.ndim == 0 else out


def alpha_from_rabi(omega, p: QubitParams):
    return np.asarray(omega) / (2.0 * math.sqrt(p.gamma_r))


def critical_power(p: QubitParams) -> float:
    """Resonant power at which coherent reflection vanishes for Gamma_phi = 0."""
    return p.photon_energy * p.gamma_r / 8.0


@dataclass(frozen=True, eq=False)
class FieldTrace:
    t: np.ndarray
    alpha_in: np.ndarray
    alpha_out: np.ndarray
    s_minus: np.ndarray | None = None
    s_z: np.ndarray | None = None
    v_on: np.ndarray | None = None
    v_off: np.ndarray | None = None

    @property
    def f_in(self) -> np.ndarray:
        return np.abs(self.alpha_in) ** 2

    @property
    def f_out(self) -> np.ndarray:
        return np.abs(self.alpha_out) ** 2


@dataclass(frozen=True)
class NoiseModel:
    """Measurement chain: gain plus additive white complex Gaussian noise.

    ``v_n`` is the per-quadrature standard deviation, referred to the sample
    plane, so the mean noise power in ``|V|^2`` is ``2 v_n^2`` (times the gain).
    ``bin_width`` (seconds) boxcar-averages the trace like a digitizer.
    """

    v_n: float = 0.0
    seed: int = 0
    bin_width: float | None = None
    gain_db: float = 0.0

    def __post_init__(self):
        if self.v_n < 0:
            raise ValueError("v_n must be non-negative")
        if self.bin_width is not None and not self.bin_width > 0:
            raise ValueError("bin_width must be positive")

    @property
    def gain(self) -> float:
        """Voltage gain factor."""
        return 10.0 ** (self.gain_db / 20.0)

    @property
    def noise_power(self) -> float:
        """Expected ``|noise|^2`` at the output, in V^2."""
        return 2.0 * (self.v_n * self.gain) ** 2


def output_field(drive: DriveTrace, traj: Trajectory, p: QubitParams) -> FieldTrace:
    if drive.t.shape != traj.t.shape or not np.array_equal(drive.t, traj.t):
        raise GridError("drive and trajectory grids differ", code="grid-mismatch", module="field")
    alpha_in = alpha_from_rabi(drive.omega, p)
    alpha_out = alpha_in + math.sqrt(p.gamma_r) * traj.s_minus
    return FieldTrace(drive.t, alpha_in, alpha_out, traj.s_minus, traj.s_z)


def reference_field(drive: DriveTrace, p: QubitParams) -> FieldTrace:
    """Far-detuned emitter: the mirror reflects the input unchanged."""
    alpha_in = alpha_from_rabi(drive.omega, p)
    return FieldTrace(drive.t, alpha_in, alpha_in.copy())


def volts_per_alpha(p: QubitParams) -> float:
    """Scale such that ``|V|^2 / (2 Z0) = hbar omega_10 |alpha|^2``."""
    return math.sqrt(2.0 * p.z0 * p.photon_energy)


def _bin(t: np.ndarray, x: np.ndarray, width: float) -> tuple[np.ndarray, np.ndarray]:
    dt = t[1] - t[0]
    per_bin = max(int(round(width / dt)), 1)
    n_bins = t.size // per_bin
    used = n_bins * per_bin
    tb = t[:used].reshape(n_bins, per_bin).mean(axis=1)
    xb = x[:used].reshape(n_bins, per_bin).mean(axis=1)
    return tb, xb


def synthesize_voltages(ft: FieldTrace, p: QubitParams, noise: NoiseModel, rng: np.random.Generator | None = None) -> FieldTrace:
    """Digitizer-like traces: ``v_on`` from ``alpha_out``, ``v_off`` from ``alpha_in``.

    Noise is added per recorded sample, after optional binning, and the whole
    chain is multiplied by the gain.  Binning returns a trace on the bin grid
    (bin centres) with the amplitudes averaged in the same way.
    """
    if rng is None:
        rng = np.random.default_rng(noise.seed)
    scale = volts_per_alpha(p)
    t, a_in, a_out = ft.t, ft.alpha_in, ft.alpha_out
    s_minus, s_z = ft.s_minus, ft.s_z
    if noise.bin_width is not None:
        tb, a_in = _bin(t, a_in, noise.bin_width)
        _, a_out = _bin(t, a_out, noise.bin_width)
        s_minus = None if s_minus is None else _bin(t, s_minus, noise.bin_width)[1]
        s_z = None if s_z is None else _bin(t, s_z, noise.bin_width)[1]
        t = tb

    def measure(alpha):
        v = scale * alpha
        if noise.v_n > 0:
            v = v + noise.v_n * (rng.standard_normal(v.size) + 1j * rng.standard_normal(v.size))
        return noise.gain * v

    v_off = measure(a_in)
    v_on = measure(a_out)
    return replace(ft, t=t, alpha_in=a_in, alpha_out=a_out, s_minus=s_minus, s_z=s_z, v_on=v_on, v_off=v_off)


def cw_reflection(omega: float, p: QubitParams, detuning: float = 0.0, duration: float | None = None, dt: float | None = None) -> complex:
    """Reflection coefficient ``alpha_out / alpha_in`` after driving with a
    constant Rabi frequency long enough to reach steady state."""
    if duration is None:
        duration = 25.0 / min(p.gamma_r, p.gamma)
    if dt is None:
        fastest = max(p.gamma, p.gamma_r, abs(detuning), abs(omega))
        dt = min(0.02 / fastest, 0.5e-9)
    n = int(math.ceil(duration / dt))
    t = dt * np.arange(n + 1)
    drive = DriveTrace(t, np.full(t.size, omega, dtype=complex))
    traj = evolve(drive, p, detuning)
    alpha_in = omega / (2.0 * math.sqrt(p.gamma_r))
    return 1.0 + math.sqrt(p.gamma_r) * traj.s_minus[-1] / alpha_in
