"""Input pulse envelopes, phase schedules and the resulting Rabi drive.

Times are in seconds, voltages are amplitudes at the sample plane.  Pulses
switch on and off on grid points; :func:`pulse_grid` builds grids with that
property so that the integrator sees every discontinuity at a step edge.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import simpson

from .errors import GridError
from .params import QubitParams

# Gaussian pulses are cut at this many FWHM on either side of the centre.
GAUSSIAN_HALF_SUPPORT = 3.5
_FOUR_LN2 = 4.0 * math.log(2.0)
_MAX_DT = 0.5e-9


class Shape(str, enum.Enum):
    EXP_RISING = "exp_rising"
    EXP_DECAYING = "exp_decaying"
    SQUARE = "square"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PulseSpec:
    """Declarative description of one input pulse.

    Exactly one of ``amplitude`` (peak volts) and ``target_n`` (mean photon
    number) is given.  ``phase_segments`` is ``(m, theta)``: the pulse-on
    window is cut into ``m`` segments whose second halves carry phase ``theta``.
    """

    shape: Shape
    tau: float
    t_start: float
    t_off: float
    amplitude: float | None = None
    target_n: float | None = None
    phase_segments: tuple[int, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.t_off > self.t_start:
            raise ValueError("t_off must be later than t_start")
        if (self.amplitude is None) == (self.target_n is None):
            raise ValueError("give exactly one of amplitude and target_n")
        if self.amplitude is not None and self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if self.target_n is not None and self.target_n < 0:
            raise ValueError("target_n must be non-negative")
        if self.phase_segments is not None:
            m, theta = self.phase_segments
            if int(m) != m or m < 1:
                raise ValueError("phase segment count must be a positive integer")
            object.__setattr__(self, "phase_segments", (int(m), float(theta)))

    @property
    def duration(self) -> float:
        return self.t_off - self.t_start

    def support(self) -> tuple[float, float]:
        """Interval outside which the envelope vanishes."""
        if self.shape is Shape.SQUARE:
            return self.t_off - self.tau, self.t_off
        if self.shape is Shape.GAUSSIAN:
            centre = self.t_off - self.tau
            half = GAUSSIAN_HALF_SUPPORT * self.tau
            return centre - half, centre + half
        return self.t_start, self.t_off

    def with_amplitude(self, amplitude: float) -> "PulseSpec":
        return replace(self, amplitude=float(amplitude), target_n=None)

    def with_tau(self, tau: float) -> "PulseSpec":
        return replace(self, tau=float(tau))


@dataclass(frozen=True, eq=False)
class DriveTrace:
    """Complex Rabi frequency on a uniform grid.

    ``stages`` optionally holds, for every step ``[t_j, t_j+1]``, the drive at
    the step start (right limit), midpoint and end (left limit).  Without it
    the integrator interpolates ``omega`` linearly.
    """

    t: np.ndarray
    omega: np.ndarray
    stages: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        omega = np.asarray(self.omega, dtype=complex)
        if t.ndim != 1 or t.size < 2 or omega.shape != t.shape:
            raise ValueError("t and omega must be 1-D arrays of equal length >= 2")
        if not np.all(np.isfinite(omega)):
            raise ValueError("drive contains non-finite samples")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "omega", omega)
        if self.stages is not None:
            stages = np.asarray(self.stages, dtype=complex)
            if stages.shape != (t.size - 1, 3):
                raise ValueError("stages must have shape (len(t) - 1, 3)")
            object.__setattr__(self, "stages", stages)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def stage_values(self) -> np.ndarray:
        if self.stages is not None:
            return self.stages
        return linear_stages(self.omega)

    def rotated(self, phi: float) -> "DriveTrace":
        """Same drive multiplied by the global phase ``exp(i phi)``."""
        factor = np.exp(1j * phi)
        stages = None if self.stages is None else self.stages * factor
        return DriveTrace(self.t, self.omega * factor, stages)


def linear_stages(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=complex)
    return np.stack([v[:-1], 0.5 * (v[:-1] + v[1:]), v[1:]], axis=1)


# -- grids -------------------------------------------------------------------


def default_dt(tau: float, p: QubitParams) -> float:
    return min(min(tau, p.t2) / 1000.0, _MAX_DT)


def time_grid(t_begin: float, t_end: float, dt: float) -> np.ndarray:
    n = int(math.ceil((t_end - t_begin) / dt - 1e-9))
    return t_begin + dt * np.arange(n + 1)


def pulse_grid(
    spec: PulseSpec,
    p: QubitParams,
    post_window: float | None = None,
    dt: float | None = None,
    pre_window: float = 0.0,
) -> np.ndarray:
    """Uniform grid with both support edges (and phase boundaries) on grid points.

    ``dt`` is an upper bound; the actual step divides the support length.
    ``post_window`` defaults to ten coherence times after the support end.
    """
    a, b = spec.support()
    if dt is None:
        dt = default_dt(spec.tau, p)
    if post_window is None:
        post_window = 10.0 * p.t2
    n_on = max(int(math.ceil((b - a) / dt - 1e-9)), 1)
    if spec.phase_segments is not None and spec.support() == (spec.t_start, spec.t_off):
        # every half-segment boundary lands on a grid point
        two_m = 2 * spec.phase_segments[0]
        n_on = two_m * int(math.ceil(n_on / two_m))
    step = (b - a) / n_on
    n_pre = int(math.ceil(pre_window / step - 1e-9))
    n_post = int(math.ceil(post_window / step - 1e-9))
    return a + step * np.arange(-n_pre, n_on + n_post + 1)


def _check_covers(grid: np.ndarray, a: float, b: float) -> None:
    tol = 1e-6 * (grid[1] - grid[0]) if grid.size > 1 else 0.0
    if grid[0] > a + tol or grid[-1] < b - tol:
        raise GridError(
            f"grid [{grid[0]:.6g}, {grid[-1]:.6g}] does not cover pulse support [{a:.6g}, {b:.6g}]",
            module="waveform",
        )


# -- envelopes ---------------------------------------------------------------


def _shape_values(spec: PulseSpec, amplitude: float, t: np.ndarray) -> np.ndarray:
    """Envelope formula without the support cut."""
    if spec.shape is Shape.EXP_RISING:
        return amplitude * np.exp((t - spec.t_off) / spec.tau)
    if spec.shape is Shape.EXP_DECAYING:
        return amplitude * np.exp(-(t - spec.t_start) / spec.tau)
    if spec.shape is Shape.SQUARE:
        return np.full_like(t, amplitude, dtype=float)
    centre = spec.t_off - spec.tau
    return amplitude * np.exp(-_FOUR_LN2 * (t - centre) ** 2 / spec.tau**2)


def resolve_amplitude(spec: PulseSpec, p: QubitParams | None = None) -> float:
    """Peak voltage of ``spec``; computed from ``target_n`` when needed."""
    if spec.amplitude is not None:
        return spec.amplitude
    if p is None:
        raise ValueError("a target photon number needs QubitParams to fix the amplitude")
    unit = photon_number(spec.with_amplitude(1.0), p)
    return math.sqrt(spec.target_n / unit)


def envelope(spec: PulseSpec, grid: np.ndarray, p: QubitParams | None = None) -> np.ndarray:
    """Voltage envelope sampled on ``grid``.

    The exponential shapes and the Gaussian include both support edges (so an
    exponentially rising pulse reads its peak at ``t_off``); the square pulse
    is on for ``t_off - tau <= t < t_off``.
    """
    grid = np.asarray(grid, dtype=float)
    a, b = spec.support()
    _check_covers(grid, a, b)
    v = _shape_values(spec, resolve_amplitude(spec, p), grid)
    tol = 1e-9 * (grid[1] - grid[0])
    if spec.shape is Shape.SQUARE:
        on = (grid >= a - tol) & (grid < b - tol)
    else:
        on = (grid >= a - tol) & (grid <= b + tol)
    return np.where(on, v, 0.0)


def photon_number(spec: PulseSpec, p: QubitParams, dt: float | None = None) -> float:
    """Mean photon number ``int V^2 / (2 Z0) dt / (hbar omega_10)`` over the support."""
    amplitude = resolve_amplitude(spec, p)
    if amplitude == 0.0:
        return 0.0
    a, b = spec.support()
    if dt is None:
        dt = default_dt(spec.tau, p)
    n = max(int(math.ceil((b - a) / dt)), 2000)
    n += n % 2
    t = np.linspace(a, b, n + 1)
    v = _shape_values(spec, amplitude, t)
    energy = simpson(v**2 / (2.0 * p.z0), x=t)
    return float(energy / p.photon_energy)


def photon_number_closed_form(spec: PulseSpec, p: QubitParams) -> float:
    """Analytic photon number for exponentially rising and square pulses."""
    v = resolve_amplitude(spec, p)
    if spec.shape is Shape.EXP_RISING:
        factor = 1.0 - math.exp(-2.0 * spec.duration / spec.tau)
        return v**2 * spec.tau / (4.0 * p.z0 * p.photon_energy) * factor
    if spec.shape is Shape.SQUARE:
        return v**2 / (2.0 * p.z0) * spec.tau / p.photon_energy
    raise ValueError(f"no closed form for shape {spec.shape.value}")


def match_amplitude(v_ref: float, tau_ref: float, tau_i: float, t0: float) -> float:
    """Voltage that keeps the photon number of an exponentially rising pulse
    fixed when its time constant changes from ``tau_ref`` to ``tau_i``.

    ``t0`` is the pulse-on duration.
    """
    if min(tau_ref, tau_i, t0) <= 0:
        raise ValueError("times must be positive")
    ratio = -math.expm1(-2.0 * t0 / tau_ref) / -math.expm1(-2.0 * t0 / tau_i)
    return v_ref * math.sqrt(tau_ref / tau_i) * math.sqrt(ratio)


# -- phase shaping -----------------------------------------------------------


def _boundary_indices(m: int, t_start: float, t_off: float, grid: np.ndarray) -> np.ndarray:
    dt = grid[1] - grid[0]
    bounds = t_start + (t_off - t_start) * np.arange(2 * m + 1) / (2 * m)
    return np.floor((bounds - grid[0]) / dt + 1e-6).astype(int)


def phase_schedule(m: int, theta: float, t_off: float, grid: np.ndarray, t_start: float = 0.0) -> np.ndarray:
    """Phase ``f(theta, t)``: 0 on the first and ``theta`` on the second half of
    each of the ``m`` segments spanning ``[t_start, t_off)``; 0 elsewhere.

    Segment boundaries are floored onto the grid.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    grid = np.asarray(grid, dtype=float)
    idx = _boundary_indices(m, t_start, t_off, grid)
    n = np.arange(grid.size)
    half = np.searchsorted(idx, n, side="right") - 1
    inside = (half >= 0) & (half < 2 * m)
    return np.where(inside & (half % 2 == 1), float(theta), 0.0)


# -- drive -------------------------------------------------------------------


def drive_trace(spec: PulseSpec, p: QubitParams, grid: np.ndarray) -> DriveTrace:
    """Rabi drive ``k sqrt(P_in(t))``, times ``exp(i f)`` when phase shaped."""
    grid = np.asarray(grid, dtype=float)
    amplitude = resolve_amplitude(spec, p)
    to_rabi = p.k_coupling / math.sqrt(2.0 * p.z0)

    v_nominal = envelope(spec, grid, p)
    a, b = spec.support()
    left, right = grid[:-1], grid[1:]
    mid = 0.5 * (left + right)
    on = (mid > a) & (mid < b)
    stages = np.stack(
        [
            np.where(on, _shape_values(spec, amplitude, left), 0.0),
            np.where(on, _shape_values(spec, amplitude, mid), 0.0),
            np.where(on, _shape_values(spec, amplitude, right), 0.0),
        ],
        axis=1,
    ).astype(complex)
    omega = v_nominal.astype(complex)

    if spec.phase_segments is not None:
        m, theta = spec.phase_segments
        f = phase_schedule(m, theta, spec.t_off, grid, spec.t_start)
        omega = omega * np.exp(1j * f)
        # a step carries the phase of its left edge: boundaries sit on grid points
        stages = stages * np.exp(1j * f[:-1])[:, None]

    return DriveTrace(grid, to_rabi * omega, to_rabi * stages)
