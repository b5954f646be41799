"""INI experiment configuration.

Sections are ``[qubit]``, ``[pulse]``, ``[simulation]``, ``[noise]``,
``[sweep]`` and ``[fock]``.  Keys carry their unit in the name (``tau_ns``,
``f10_ghz``); rates and frequencies are cyclic (divided by 2 pi).  Values are
kept in file units so that :meth:`ExperimentConfig.to_ini` reproduces the
parsed structure exactly.
"""

import configparser
import dataclasses
import hashlib
import math
import re
import typing
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError
from .field import NoiseModel, dbm_to_watts
from .params import QubitParams, TransmonEnergies
from .waveform import PulseSpec, Shape

MHZ = 2.0 * math.pi * 1e6
GHZ = 2.0 * math.pi * 1e9


@dataclass(frozen=True)
class QubitSection:
    gamma_r_mhz: float
    gamma_phi_mhz: float
    f10_ghz: float
    k_coupling: Optional[float] = None
    z0_ohm: float = 50.0
    label: str = ""
    e_c_mhz: Optional[float] = None
    e_j_ghz: Optional[float] = None

    def params(self) -> QubitParams:
        return QubitParams(
            gamma_r=self.gamma_r_mhz * MHZ,
            gamma_phi=self.gamma_phi_mhz * MHZ,
            omega_10=self.f10_ghz * GHZ,
            k_coupling=self.k_coupling,
            z0=self.z0_ohm,
            label=self.label,
        )

    def energies(self) -> Optional[TransmonEnergies]:
        if self.e_c_mhz is None and self.e_j_ghz is None:
            return None
        if self.e_c_mhz is None or self.e_j_ghz is None:
            raise ValueError("give both e_c_mhz and e_j_ghz")
        return TransmonEnergies(e_c=self.e_c_mhz * 1e6, e_j=self.e_j_ghz * 1e9)


@dataclass(frozen=True)
class PulseSection:
    shape: str
    tau_ns: float
    t_off_us: float
    t_start_us: float = 0.0
    peak_dbm: Optional[float] = None
    target_n: Optional[float] = None
    phase_m: Optional[int] = None
    phase_theta_deg: Optional[float] = None

    def spec(self, z0: float) -> PulseSpec:
        amplitude = None
        if self.peak_dbm is not None:
            amplitude = math.sqrt(2.0 * z0 * dbm_to_watts(self.peak_dbm))
        segments = None
        if self.phase_m is not None and self.phase_m > 0:
            theta = 180.0 if self.phase_theta_deg is None else self.phase_theta_deg
            segments = (self.phase_m, math.radians(theta))
        return PulseSpec(
            shape=Shape(self.shape),
            tau=self.tau_ns * 1e-9,
            t_start=self.t_start_us * 1e-6,
            t_off=self.t_off_us * 1e-6,
            amplitude=amplitude,
            target_n=self.target_n,
            phase_segments=segments,
        )


@dataclass(frozen=True)
class SimulationSection:
    dt_ns: Optional[float] = None
    post_window_us: Optional[float] = None
    detuning_mhz: float = 0.0

    def kwargs(self) -> dict:
        return {
            "dt": None if self.dt_ns is None else self.dt_ns * 1e-9,
            "post_window": None if self.post_window_us is None else self.post_window_us * 1e-6,
            "detuning": self.detuning_mhz * MHZ,
        }


@dataclass(frozen=True)
class NoiseSection:
    v_n_nv: float = 0.0
    seed: int = 0
    bin_ns: Optional[float] = None
    gain_db: float = 0.0

    def model(self, seed: Optional[int] = None) -> NoiseModel:
        return NoiseModel(
            v_n=self.v_n_nv * 1e-9,
            seed=self.seed if seed is None else seed,
            bin_width=None if self.bin_ns is None else self.bin_ns * 1e-9,
            gain_db=self.gain_db,
        )


SWEEP_PARAMETERS = {"tau": "tau_ns", "n": "n", "m": "m", "theta": "theta_deg"}


@dataclass(frozen=True)
class SweepSection:
    parameter: str
    values: Optional[tuple[float, ...]] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    num: Optional[int] = None
    scale: str = "linear"
    workers: int = 1

    def grid(self) -> list[float]:
        """Sweep values in file units (ns for tau, degrees for theta)."""
        if self.values is not None:
            return list(self.values)
        if self.start is None or self.stop is None or self.num is None:
            raise ValueError("give either values or start, stop and num")
        if self.scale == "log":
            return [float(x) for x in np.geomspace(self.start, self.stop, self.num)]
        return [float(x) for x in np.linspace(self.start, self.stop, self.num)]


@dataclass(frozen=True)
class FockSection:
    tau_ns: Optional[float] = None
    dt_ns: Optional[float] = None


SECTIONS = {
    "qubit": QubitSection,
    "pulse": PulseSection,
    "simulation": SimulationSection,
    "noise": NoiseSection,
    "sweep": SweepSection,
    "fock": FockSection,
}


@dataclass(frozen=True)
class ExperimentConfig:
    qubit: Optional[QubitSection] = None
    pulse: Optional[PulseSection] = None
    simulation: Optional[SimulationSection] = None
    noise: Optional[NoiseSection] = None
    sweep: Optional[SweepSection] = None
    fock: Optional[FockSection] = None

    def require(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise ConfigError(f"missing [{name}] section")

    def to_ini(self) -> str:
        out = []
        for name in SECTIONS:
            section = getattr(self, name)
            if section is None:
                continue
            out.append(f"[{name}]")
            for f in dataclasses.fields(section):
                value = getattr(section, f.name)
                if value is None:
                    continue
                out.append(f"{f.name} = {_format(value)}")
            out.append("")
        return "\n".join(out)

    def digest(self) -> str:
        return hashlib.sha256(self.to_ini().encode()).hexdigest()


def _format(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


def _line_index(text: str) -> dict[tuple[str, Optional[str]], int]:
    index: dict[tuple[str, Optional[str]], int] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip().lower()
            index.setdefault((section, None), lineno)
            continue
        m = _KEY_RE.match(line)
        if m and section is not None and not line[:1].isspace():
            index.setdefault((section, m.group(1).strip().lower()), lineno)
    return index


def _convert(raw: str, hint):
    args = typing.get_args(hint)
    if type(None) in args:
        hint = next(a for a in args if a is not type(None))
    if hint is float:
        return float(raw)
    if hint is int:
        value = float(raw)
        if value != int(value):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(value)
    if typing.get_origin(hint) is tuple:
        items = [x for x in re.split(r"[,\s]+", raw.strip()) if x]
        if not items:
            raise ValueError("empty list")
        return tuple(float(x) for x in items)
    return raw.strip()


def _build_section(name: str, items: dict[str, str], index) -> object:
    cls = SECTIONS[name]
    hints = typing.get_type_hints(cls)
    kwargs = {}
    for key, raw in items.items():
        line = index.get((name, key))
        if key not in hints:
            raise ConfigError(f"unknown key {key!r} in [{name}]", line=line)
        try:
            kwargs[key] = _convert(raw, hints[key])
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", line=line) from None
    try:
        section = cls(**kwargs)
    except TypeError:
        required = [f.name for f in dataclasses.fields(cls) if f.default is dataclasses.MISSING]
        missing = [k for k in required if k not in kwargs]
        raise ConfigError(f"[{name}] is missing {', '.join(missing)}", line=index.get((name, None))) from None
    return section


def _validate(cfg: ExperimentConfig, index) -> None:
    """Build the domain objects once so bad values are reported at parse time."""
    checks = []
    if cfg.qubit is not None:
        checks.append(("qubit", lambda: (cfg.qubit.params(), cfg.qubit.energies())))
    if cfg.pulse is not None:
        z0 = cfg.qubit.z0_ohm if cfg.qubit is not None else 50.0
        checks.append(("pulse", lambda: cfg.pulse.spec(z0)))
    if cfg.noise is not None:
        checks.append(("noise", cfg.noise.model))
    if cfg.sweep is not None:

        def sweep_check():
            if cfg.sweep.parameter not in SWEEP_PARAMETERS:
                raise ValueError(f"unknown sweep parameter {cfg.sweep.parameter!r} (use tau, n, m or theta)")
            if cfg.sweep.scale not in ("linear", "log"):
                raise ValueError("scale must be linear or log")
            if cfg.sweep.workers < 1:
                raise ValueError("workers must be at least 1")
            if len(cfg.sweep.grid()) == 0:
                raise ValueError("empty sweep")

        checks.append(("sweep", sweep_check))
    for name, check in checks:
        try:
            check()
        except ValueError as exc:
            raise ConfigError(f"[{name}] {exc}", line=index.get((name, None))) from None


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("text before the first section header", line=exc.lineno) from None
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ConfigError(exc.message.split(":", 1)[-1].strip(), line=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"cannot parse {line!r}", line=lineno) from None
    index = _line_index(text)
    built = {}
    for name in parser.sections():
        key = name.strip().lower()
        if key not in SECTIONS:
            raise ConfigError(f"unknown section [{name}]", line=index.get((key, None)))
        built[key] = _build_section(key, dict(parser.items(name)), index)
    cfg = ExperimentConfig(**built)
    _validate(cfg, index)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)
