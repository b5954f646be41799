"""Shaped-pulse loading of a two-level emitter in front of a mirror."""

from .charfit import FitResult, ReflectionSample, fit_power_scan, fit_spectrum, r_power, r_weak_probe
from .config import ExperimentConfig, load_config, parse_config
from .dynamics import Trajectory, evolve, steady_state
from .efficiency import (
    EfficiencyResult,
    Method,
    SimulationResult,
    eta_analytic_coherent,
    eta_coherent_flux,
    eta_matched,
    eta_square_weak,
    eta_windowed,
    optimal_tau,
    simulate,
    sweep,
    sweep_phase,
    sweep_photon_number,
    sweep_tau,
)
from .errors import (
    AtomLoadError,
    ConfigError,
    EfficiencyError,
    FitDivergedError,
    FitError,
    GridError,
    IntegrationError,
)
from .field import FieldTrace, NoiseModel, cw_reflection, output_field, synthesize_voltages
from .fock import evolve_fock, fock_efficiency, fock_efficiency_numeric, fock_tau_opt, xi_exp_rising
from .params import SAMPLE1, SAMPLE2, QubitParams, TransmonEnergies, coherence_times, decoherence_rate
from .waveform import PulseSpec, Shape, drive_trace, envelope, match_amplitude, phase_schedule, photon_number

__all__ = [name for name in dir() if not name.startswith("_")]
