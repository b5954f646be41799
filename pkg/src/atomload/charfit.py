"""Steady-state reflection models and parameter extraction.

Weak probe at detuning ``delta = omega_10 - omega_p``::

    r = 1 - Gamma / (gamma + i delta)

Resonant probe of Rabi frequency ``k sqrt(P)``::

    r = 1 - Gamma^2 / (Gamma gamma + k^2 P)

Fits use a small damped least-squares (Levenberg-Marquardt) solver on
rescaled parameters.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import FitDivergedError, FitError


def r_weak_probe(delta, gamma_r: float, gamma: float):
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return 1.0 - gamma_r / (gamma + 1j * np.asarray(delta, dtype=float))


def r_power(p_in, gamma_r: float, gamma: float, k: float):
    p_in = np.asarray(p_in, dtype=float)
    if np.any(p_in < 0):
        raise ValueError("power must be non-negative")
    return 1.0 - gamma_r**2 / (gamma_r * gamma + k**2 * p_in)


def critical_rabi_squared(gamma_r: float, gamma: float) -> float:
    """``Omega^2`` at which the resonant reflection vanishes (needs gamma < Gamma)."""
    return gamma_r * (gamma_r - gamma)


@dataclass(frozen=True, eq=False)
class ReflectionSample:
    """Columnar reflection data: a frequency scan (``omega_p``, complex ``r``)
    or a resonant power scan (``p_in`` in watts, real ``r`` = ``|r|``)."""

    r: np.ndarray
    omega_p: np.ndarray | None = None
    p_in: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r))
        for name in ("omega_p", "p_in"):
            value = getattr(self, name)
            if value is not None:
                value = np.asarray(value, dtype=float)
                if value.shape != self.r.shape:
                    raise ValueError(f"{name} and r differ in length")
                object.__setattr__(self, name, value)
        if not np.all(np.isfinite(self.r)):
            raise ValueError("reflection data must be finite")


@dataclass
class FitResult:
    gamma_r: float
    gamma: float
    omega_10: float
    k_coupling: float | None
    residual_norm: float
    stderr: dict[str, float]
    flags: list[str] = field(default_factory=list)
    iterations: int = 0
    converged: bool = True

    @property
    def gamma_phi(self) -> float:
        return self.gamma - 0.5 * self.gamma_r

    def as_text(self) -> str:
        lines = [
            f"gamma_r_mhz = {self.gamma_r / 2 / math.pi / 1e6:.6f}",
            f"gamma_mhz = {self.gamma / 2 / math.pi / 1e6:.6f}",
            f"gamma_phi_mhz = {self.gamma_phi / 2 / math.pi / 1e6:.6f}",
            f"f10_ghz = {self.omega_10 / 2 / math.pi / 1e9:.9f}",
        ]
        if self.k_coupling is not None:
            lines.append(f"k_coupling = {self.k_coupling:.6e}")
        for name, err in self.stderr.items():
            lines.append(f"stderr_{name} = {err:.3e}")
        lines.append(f"residual_norm = {self.residual_norm:.3e}")
        lines.append(f"iterations = {self.iterations}")
        lines.append(f"flags = {','.join(self.flags) if self.flags else 'none'}")
        return "\n".join(lines)


@dataclass
class _LMState:
    x: np.ndarray
    residual: np.ndarray
    jac: np.ndarray
    iterations: int
    converged: bool


def levenberg_marquardt(fun, jac, x0, gtol: float = 1e-10, xtol: float = 1e-14, max_iter: int = 500) -> _LMState:
    """Minimise ``0.5 |fun(x)|^2`` with Marquardt scaling and Nielsen's damping update."""
    x = np.array(x0, dtype=float)
    r = fun(x)
    J = jac(x)
    cost = 0.5 * r @ r
    A = J.T @ J
    g = J.T @ r
    mu = 1e-3 * max(np.max(np.diag(A)), 1e-300)
    nu = 2.0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(g)) < gtol:
            return _LMState(x, r, J, it - 1, True)
        d = np.maximum(np.diag(A), 1e-12 * np.max(np.diag(A)) + 1e-300)
        try:
            h = np.linalg.solve(A + mu * np.diag(d), -g)
        except np.linalg.LinAlgError:
            mu *= nu
            nu *= 2.0
            continue
        if np.linalg.norm(h) <= xtol * (np.linalg.norm(x) + xtol):
            return _LMState(x, r, J, it, True)
        x_new = x + h
        r_new = fun(x_new)
        cost_new = 0.5 * r_new @ r_new
        predicted = 0.5 * h @ (mu * d * h - g)
        rho = (cost - cost_new) / predicted if predicted > 0 else -1.0
        if np.isfinite(cost_new) and rho > 0:
            x, r, cost = x_new, r_new, cost_new
            J = jac(x)
            A = J.T @ J
            g = J.T @ r
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
            nu = 2.0
        else:
            mu *= nu
            nu *= 2.0
            if mu > 1e300:
                break
    return _LMState(x, r, J, max_iter, False)


def _covariance(state: _LMState, n_data: int) -> np.ndarray:
    dof = max(n_data - state.x.size, 1)
    sigma2 = (state.residual @ state.residual) / dof
    try:
        return sigma2 * np.linalg.inv(state.jac.T @ state.jac)
    except np.linalg.LinAlgError:
        return np.full((state.x.size, state.x.size), np.inf)


def initial_guess(omega_p: np.ndarray, r: np.ndarray) -> tuple[float, float, float]:
    """``(Gamma, gamma, omega_10)`` read off the resonance feature.

    ``|1 - r|^2 = Gamma^2 / (gamma^2 + delta^2)`` is a Lorentzian of half width
    ``gamma`` centred on ``omega_10``, whatever the sign of the pure dephasing.
    """
    order = np.argsort(omega_p)
    w, r = omega_p[order], r[order]
    dip = np.abs(1.0 - r) ** 2
    i0 = int(np.argmax(dip))
    depth = dip[i0]
    if not depth > 1e-12:
        raise FitDivergedError("no resonance feature in the data")
    half = depth / 2.0
    lo = i0
    while lo > 0 and dip[lo] > half:
        lo -= 1
    hi = i0
    while hi < w.size - 1 and dip[hi] > half:
        hi += 1
    gamma = 0.5 * (w[hi] - w[lo])
    if not gamma > 0:
        gamma = 0.5 * (w[-1] - w[0]) / max(w.size - 1, 1)
    gamma_r = gamma * (1.0 - r[i0].real)
    return float(gamma_r), float(gamma), float(w[i0])


def fit_spectrum(
    omega_p,
    r,
    init: tuple[float, float, float] | None = None,
    probe_rabi: float | None = None,
    max_iter: int = 500,
) -> FitResult:
    """Fit ``(Gamma, gamma, omega_10)`` to a complex weak-probe spectrum."""
    omega_p = np.asarray(omega_p, dtype=float)
    r = np.asarray(r, dtype=complex)
    if omega_p.size < 8:
        raise FitError("at least 8 frequency points are needed", code="too-few-points")
    if init is None:
        init = initial_guess(omega_p, r)
    g_r0, g0, w0 = init
    scale = g0
    if probe_rabi is not None and probe_rabi > g0 / 10.0:
        warnings.warn("probe Rabi frequency exceeds gamma/10; the weak-probe model may be biased", stacklevel=2)

    def model(x):
        gamma_r, gamma, w10 = x[0] * scale, x[1] * scale, w0 + x[2] * scale
        return gamma_r, gamma + 1j * (w10 - omega_p)

    def fun(x):
        gamma_r, den = model(x)
        res = (1.0 - gamma_r / den) - r
        return np.concatenate([res.real, res.imag])

    def jac(x):
        gamma_r, den = model(x)
        d_gr = -1.0 / den
        d_g = gamma_r / den**2
        d_w = 1j * gamma_r / den**2
        cols = np.stack([d_gr, d_g, d_w], axis=1) * scale
        return np.concatenate([cols.real, cols.imag], axis=0)

    state = levenberg_marquardt(fun, jac, [g_r0 / scale, g0 / scale, 0.0], max_iter=max_iter)
    gamma_r, gamma, w10 = state.x[0] * scale, state.x[1] * scale, w0 + state.x[2] * scale
    cov = _covariance(state, 2 * omega_p.size)
    err = np.sqrt(np.abs(np.diag(cov))) * scale
    result = FitResult(
        gamma_r=float(gamma_r),
        gamma=float(gamma),
        omega_10=float(w10),
        k_coupling=None,
        residual_norm=float(np.linalg.norm(state.residual)),
        stderr={"gamma_r": float(err[0]), "gamma": float(err[1]), "omega_10": float(err[2])},
        iterations=state.iterations,
        converged=state.converged,
    )
    if gamma < 0.5 * gamma_r:
        result.flags.append("nonphysical-dephasing")
        warnings.warn("fitted gamma < Gamma/2 (negative pure dephasing)", stacklevel=2)
    if not gamma_r > 2.0 * err[0]:
        result.flags.append("vanishing-coupling")
    if not state.converged:
        result.converged = False
        raise FitDivergedError(f"no convergence after {state.iterations} iterations", result)
    return result


def fit_power_scan(p_in, abs_r, gamma_r: float, gamma: float, k0: float | None = None) -> tuple[float, float]:
    """Fit the coupling ``k`` to ``|r|`` versus resonant power; returns ``(k, stderr)``."""
    p_in = np.asarray(p_in, dtype=float)
    abs_r = np.abs(np.asarray(abs_r, dtype=float))
    order = np.argsort(p_in)
    p_in, abs_r = p_in[order], abs_r[order]
    i_min = int(np.argmin(abs_r))
    if p_in.size < 5 or i_min == 0 or i_min == p_in.size - 1 or gamma >= gamma_r:
        raise FitError("the power scan does not bracket the reflection minimum", code="power-range-insufficient")
    if k0 is None:
        k0 = math.sqrt(critical_rabi_squared(gamma_r, gamma) / p_in[i_min])

    def signed(x):
        return r_power(p_in, gamma_r, gamma, x[0] * k0)

    def fun(x):
        return np.abs(signed(x)) - abs_r

    def jac(x):
        k = x[0] * k0
        den = gamma_r * gamma + k**2 * p_in
        d = gamma_r**2 * 2.0 * k * p_in / den**2 * k0
        return (np.sign(signed(x)) * d)[:, None]

    state = levenberg_marquardt(fun, jac, [1.0])
    if not state.converged:
        raise FitDivergedError("power-scan fit did not converge")
    cov = _covariance(state, p_in.size)
    return float(state.x[0] * k0), float(math.sqrt(abs(cov[0, 0])) * k0)
