"""Loading efficiency: estimators, closed forms, pipeline and sweeps.

The efficiency of a coherent pulse is the coherent energy re-emitted after
turn-off ``t0`` divided by the input energy.  It is estimated either from
(possibly noisy) voltage traces, subtracting the noise floor, or directly
from the simulated photon fluxes.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from ._quad import integrate_window
from .dynamics import Trajectory, evolve
from .errors import EfficiencyError
from .field import FieldTrace, NoiseModel, output_field, synthesize_voltages, volts_per_alpha
from .fock import fock_efficiency
from .params import QubitParams
from .waveform import DriveTrace, PulseSpec, Shape, drive_trace, match_amplitude, pulse_grid, resolve_amplitude

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_SEPARABLE = (Shape.EXP_RISING, Shape.SQUARE)


class Method(str, enum.Enum):
    WINDOWED_VOLTAGE = "windowed-voltage"
    COHERENT_FLUX = "flux"
    ANALYTIC_COHERENT = "analytic-coherent"
    ANALYTIC_FOCK = "analytic-fock"


@dataclass(frozen=True)
class EfficiencyResult:
    eta: float
    e_on: float
    e_off: float
    windows: tuple[float, float, float] | None
    method: Method


# -- estimators ----------------------------------------------------------------


def eta_windowed(
    t: np.ndarray,
    v_on: np.ndarray,
    v_off: np.ndarray,
    windows: tuple[float, float, float],
    noise: NoiseModel | None = None,
) -> EfficiencyResult:
    """``E_on / E_off`` from voltage traces with the noise floor subtracted.

    ``E_off`` integrates ``|v_off|^2 - floor`` over ``[t_i, t0]`` and ``E_on``
    integrates ``|v_on|^2 - floor`` over ``[t0, t_f]``.  Negative integrand
    values are kept so the estimate stays unbiased.
    """
    t_i, t0, t_f = windows
    if not t_i < t0 < t_f:
        raise ValueError("windows must satisfy t_i < t0 < t_f")
    floor = 0.0 if noise is None else noise.noise_power
    e_off = integrate_window(t, np.abs(v_off) ** 2 - floor, t_i, t0)
    e_on = integrate_window(t, np.abs(v_on) ** 2 - floor, t0, t_f)
    if not e_off > 0:
        raise EfficiencyError(
            f"reference energy {e_off:.3g} is not positive; the window is buried in noise",
            module="efficiency",
        )
    return EfficiencyResult(e_on / e_off, e_on, e_off, (t_i, t0, t_f), Method.WINDOWED_VOLTAGE)


def eta_coherent_flux(ft: FieldTrace, windows: tuple[float, float, float]) -> EfficiencyResult:
    """Same ratio in photon units straight from ``alpha_in`` and ``alpha_out``."""
    t_i, t0, t_f = windows
    e_off = integrate_window(ft.t, ft.f_in, t_i, t0)
    e_on = integrate_window(ft.t, ft.f_out, t0, t_f)
    if not e_off > 0:
        raise EfficiencyError("input energy is not positive", module="efficiency")
    return EfficiencyResult(e_on / e_off, e_on, e_off, (t_i, t0, t_f), Method.COHERENT_FLUX)


def default_windows(
    ft: FieldTrace,
    spec: PulseSpec,
    p: QubitParams,
    noise: NoiseModel | None = None,
) -> tuple[float, float, float]:
    """Integration windows ``(t_i, t0, t_f)``.

    Noiseless: the pulse support start, the turn-off, and ten coherence times
    later.  With noise, ``t_i`` and ``t_f`` move to where the noiseless signal
    meets the noise level.
    """
    t0 = spec.t_off
    t_i = spec.support()[0]
    t_f = min(t0 + 10.0 * p.t2, ft.t[-1])
    if noise is None or noise.v_n == 0:
        return t_i, t0, t_f
    level = math.sqrt(2.0) * noise.v_n / volts_per_alpha(p)  # rms noise magnitude in alpha units
    off = np.abs(ft.alpha_in) >= level
    on = np.abs(ft.alpha_out) >= level
    before = np.nonzero(off & (ft.t < t0))[0]
    after = np.nonzero(on & (ft.t > t0))[0]
    dt = ft.t[1] - ft.t[0]
    if before.size:
        t_i = max(t_i, float(ft.t[before[0]]))
    else:
        t_i = t0 - 4 * dt
    t_f = float(ft.t[after[-1]]) if after.size else t0 + 4 * dt
    return t_i, t0, min(t_f, t0 + 10.0 * p.t2)


# -- closed forms ----------------------------------------------------------------


def eta_analytic_coherent(tau: float, p: QubitParams) -> float:
    """Weak-drive efficiency of an exponentially rising coherent pulse."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    g = p.gamma
    return p.gamma_r**2 / (g * tau * (g + 1.0 / tau) ** 2)


def eta_square_weak(width: float, p: QubitParams) -> float:
    """Weak-drive efficiency of a square pulse of the given width."""
    g = p.gamma
    return p.gamma_r**2 * (-math.expm1(-g * width)) ** 2 / (2.0 * g**3 * width)


def eta_matched(p: QubitParams) -> float:
    """Coherent efficiency at ``tau = 1/gamma``: ``(1 + 2 Gamma_phi / Gamma)^-2``."""
    return (1.0 + 2.0 * p.gamma_phi / p.gamma_r) ** -2


def coherent_tau_opt(p: QubitParams) -> float:
    return 1.0 / p.gamma


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, rtol: float = 1e-6, max_iter: int = 200
) -> tuple[float, float]:
    """Maximise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    x1 = b - _INV_GOLDEN * (b - a)
    x2 = a + _INV_GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= rtol * 0.5 * (abs(a) + abs(b)):
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_GOLDEN * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def optimal_tau(p: QubitParams, kind: str = "coherent", rtol: float = 1e-6) -> tuple[float, float]:
    """Numerically optimal time constant and efficiency for ``kind`` in
    ``{"coherent", "fock"}``, searched over ``[0.05, 20] / gamma``."""
    func = {"coherent": eta_analytic_coherent, "fock": fock_efficiency}[kind]
    return golden_section_max(lambda tau: func(tau, p), 0.05 / p.gamma, 20.0 / p.gamma, rtol)


def analytic_result(tau: float, p: QubitParams, kind: str = "coherent") -> EfficiencyResult:
    if kind == "coherent":
        return EfficiencyResult(eta_analytic_coherent(tau, p), float("nan"), float("nan"), None, Method.ANALYTIC_COHERENT)
    return EfficiencyResult(fock_efficiency(tau, p), float("nan"), 1.0, None, Method.ANALYTIC_FOCK)


# -- pipeline ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SimulationResult:
    spec: PulseSpec
    drive: DriveTrace
    trajectory: Trajectory
    field: FieldTrace
    efficiency: EfficiencyResult | None
    flux_efficiency: EfficiencyResult | None


def simulate(
    spec: PulseSpec,
    p: QubitParams,
    *,
    detuning: float = 0.0,
    dt: float | None = None,
    post_window: float | None = None,
    noise: NoiseModel | None = None,
) -> SimulationResult:
    """Drive, integrate, reflect and measure one pulse.

    The efficiency is only evaluated for shapes whose absorption and emission
    are separated in time (exponentially rising and square pulses).
    """
    spec = spec.with_amplitude(resolve_amplitude(spec, p))
    grid = pulse_grid(spec, p, post_window=post_window, dt=dt)
    drive = drive_trace(spec, p, grid)
    traj = evolve(drive, p, detuning)
    ft = output_field(drive, traj, p)
    measured = synthesize_voltages(ft, p, noise if noise is not None else NoiseModel())

    eff = flux = None
    if spec.shape in _SEPARABLE:
        clean = default_windows(ft, spec, p)
        flux = eta_coherent_flux(ft, clean)
        windows = default_windows(measured, spec, p, noise)
        eff = eta_windowed(measured.t, measured.v_on, measured.v_off, windows, noise)
    return SimulationResult(spec, drive, traj, measured, eff, flux)


def _require_separable(spec: PulseSpec) -> None:
    if spec.shape not in _SEPARABLE:
        raise EfficiencyError(
            f"efficiency is undefined for {spec.shape.value} pulses (absorption and emission overlap)",
            code="no-time-separation",
            module="efficiency",
        )


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _reference_amplitude(template: PulseSpec, p: QubitParams, n_target: float | None) -> float:
    if n_target is not None:
        template = replace(template, amplitude=None, target_n=float(n_target))
    return resolve_amplitude(template, p)


def amplitude_for_tau(template: PulseSpec, v_ref: float, tau: float) -> float:
    """Voltage keeping the template's photon number at time constant ``tau``."""
    if template.shape is Shape.EXP_RISING:
        return match_amplitude(v_ref, template.tau, tau, template.duration)
    return v_ref * math.sqrt(template.tau / tau)


def sweep_tau(
    p: QubitParams,
    template: PulseSpec,
    taus: Iterable[float],
    n_target: float | None = None,
    *,
    workers: int = 1,
    **sim_kwargs,
) -> list[tuple[float, EfficiencyResult]]:
    """Efficiency versus time constant at a fixed mean photon number."""
    _require_separable(template)
    taus = [float(x) for x in taus]
    if any(tau <= 0 for tau in taus):
        raise ValueError("time constants must be positive")
    v_ref = _reference_amplitude(template, p, n_target)
    base = template.with_amplitude(v_ref)

    def run(tau):
        spec = replace(base, tau=tau, amplitude=amplitude_for_tau(base, v_ref, tau))
        return simulate(spec, p, **sim_kwargs).efficiency

    return list(zip(taus, _map(run, taus, workers)))


def sweep_photon_number(
    p: QubitParams,
    template: PulseSpec,
    ns: Iterable[float],
    *,
    workers: int = 1,
    **sim_kwargs,
) -> list[tuple[float, EfficiencyResult]]:
    _require_separable(template)
    ns = [float(x) for x in ns]
    if any(n <= 0 for n in ns):
        raise ValueError("photon numbers must be positive")

    def run(n):
        spec = replace(template, amplitude=None, target_n=n)
        return simulate(spec, p, **sim_kwargs).efficiency

    return list(zip(ns, _map(run, ns, workers)))


def sweep_phase(
    p: QubitParams,
    template: PulseSpec,
    mode: str,
    values: Iterable[float],
    *,
    m: int = 50,
    theta: float = math.pi,
    workers: int = 1,
    **sim_kwargs,
) -> list[tuple[float, EfficiencyResult]]:
    """Efficiency versus segment count (``mode="m"``, phase ``theta``) or
    versus phase (``mode="theta"``, ``m`` segments).  ``m = 0`` means no
    modulation."""
    _require_separable(template)
    if mode not in ("m", "theta"):
        raise ValueError("mode must be 'm' or 'theta'")
    values = list(values)
    v = resolve_amplitude(template, p)

    def run(x):
        if mode == "m":
            segs = None if int(x) == 0 else (int(x), theta)
        else:
            segs = (m, float(x))
        spec = replace(template, amplitude=v, target_n=None, phase_segments=segs)
        return simulate(spec, p, **sim_kwargs).efficiency

    return list(zip(values, _map(run, values, workers)))


def sweep(p: QubitParams, template: PulseSpec, parameter: str, values: Sequence[float], **kwargs):
    """Dispatch on ``parameter`` in ``{"tau", "n", "m", "theta"}``."""
    if len(values) == 0:
        raise ValueError("sweep needs at least one value")
    if parameter == "tau":
        return sweep_tau(p, template, values, **kwargs)
    if parameter == "n":
        return sweep_photon_number(p, template, values, **kwargs)
    if parameter in ("m", "theta"):
        return sweep_phase(p, template, parameter, values, **kwargs)
    raise ValueError(f"unknown sweep parameter {parameter!r}")


def pipeline_tau_opt(
    p: QubitParams,
    template: PulseSpec,
    n_target: float,
    bounds: tuple[float, float] | None = None,
    rtol: float = 1e-6,
    **sim_kwargs,
) -> tuple[float, float]:
    """Time constant maximising the simulated efficiency at fixed photon number."""
    _require_separable(template)
    if bounds is None:
        bounds = (0.05 / p.gamma, 20.0 / p.gamma)
    v_ref = _reference_amplitude(template, p, n_target)
    base = template.with_amplitude(v_ref)

    def eta(tau):
        spec = replace(base, tau=tau, amplitude=amplitude_for_tau(base, v_ref, tau))
        return simulate(spec, p, **sim_kwargs).efficiency.eta

    return golden_section_max(eta, *bounds, rtol=rtol)
