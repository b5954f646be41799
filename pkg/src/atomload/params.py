"""Device parameters of the emitter and the quantities derived from them.

All rates are stored as angular rates (rad/s).  Measured values are usually
quoted as ``rate / 2pi`` in Hz; use :meth:`QubitParams.from_cyclic` for those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.constants import hbar

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QubitParams:
    """Two-level emitter coupled to the end of a semi-infinite line.

    ``k_coupling`` relates drive power to Rabi frequency, ``Omega = k sqrt(P)``.
    When omitted it is set to ``2 sqrt(gamma_r / (hbar omega_10))``, the value
    at which ``Omega = 2 sqrt(gamma_r) alpha_in`` and ``|alpha_in|^2 = P / (hbar omega_10)``
    agree.
    """

    gamma_r: float
    gamma_phi: float
    omega_10: float
    k_coupling: float | None = None
    z0: float = 50.0
    label: str = ""

    def __post_init__(self):
        for name in ("gamma_r", "omega_10", "z0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        if not (math.isfinite(self.gamma_phi) and self.gamma_phi >= 0):
            raise ValueError(f"gamma_phi must be non-negative, got {self.gamma_phi!r}")
        if self.k_coupling is None:
            object.__setattr__(self, "k_coupling", 2.0 * math.sqrt(self.gamma_r / (hbar * self.omega_10)))
        elif not (math.isfinite(self.k_coupling) and self.k_coupling > 0):
            raise ValueError(f"k_coupling must be positive, got {self.k_coupling!r}")

    @classmethod
    def from_cyclic(
        cls,
        gamma_r: float,
        gamma_phi: float,
        f_10: float,
        k_coupling: float | None = None,
        z0: float = 50.0,
        label: str = "",
    ) -> "QubitParams":
        """Build from cyclic values in Hz (``Gamma/2pi``, ``Gamma_phi/2pi``, ``omega_10/2pi``)."""
        return cls(
            gamma_r=TWO_PI * gamma_r,
            gamma_phi=TWO_PI * gamma_phi,
            omega_10=TWO_PI * f_10,
            k_coupling=k_coupling,
            z0=z0,
            label=label,
        )

    @property
    def gamma(self) -> float:
        return decoherence_rate(self)

    @property
    def t1(self) -> float:
        return 1.0 / self.gamma_r

    @property
    def t2(self) -> float:
        return 1.0 / self.gamma

    @property
    def photon_energy(self) -> float:
        """``hbar omega_10`` in joules."""
        return hbar * self.omega_10

    def with_dephasing(self, gamma_phi: float) -> "QubitParams":
        return replace(self, gamma_phi=gamma_phi)


@dataclass(frozen=True)
class TransmonEnergies:
    e_c: float  # Hz
    e_j: float  # Hz

    def __post_init__(self):
        if not (self.e_c > 0 and self.e_j > 0):
            raise ValueError("transmon energies must be positive")
        if self.e_j / self.e_c <= 1.0:
            raise ValueError(f"E_J/E_C must exceed 1 (got {self.e_j / self.e_c:.3g})")

    @property
    def ratio(self) -> float:
        return self.e_j / self.e_c


def decoherence_rate(p: QubitParams) -> float:
    return 0.5 * p.gamma_r + p.gamma_phi


def coherence_times(p: QubitParams) -> tuple[float, float]:
    """Return ``(T1, T2)`` in seconds."""
    return 1.0 / p.gamma_r, 1.0 / decoherence_rate(p)


def transmon_frequency(e: TransmonEnergies) -> float:
    """Approximate 0-1 transition frequency in Hz, ``sqrt(8 E_J E_C) - E_C``."""
    return math.sqrt(8.0 * e.e_j * e.e_c) - e.e_c


def dephasing_ratio(p: QubitParams) -> float:
    return p.gamma_phi / p.gamma_r


# Table values of the two measured devices (cyclic units).
SAMPLE1 = QubitParams.from_cyclic(1.686e6, 0.113e6, 4.8514e9, label="Sample 1")
SAMPLE2 = QubitParams.from_cyclic(2.046e6, 0.031e6, 4.8187e9, label="Sample 2")
SAMPLE1_ENERGIES = TransmonEnergies(e_c=385e6, e_j=8.9e9)
SAMPLE2_ENERGIES = TransmonEnergies(e_c=200e6, e_j=15.7e9)

# Pulse turn-off times used with the two devices.
SAMPLE1_T_OFF = 2.635e-6
SAMPLE2_T_OFF = 0.825e-6
