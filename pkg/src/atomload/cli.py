"""Command line entry point: ``atomload {simulate,fock,sweep,fit,analytic}``.

Exit codes: 0 on success, 1 for configuration problems, 2 for numerical
failures inside the simulation or fit.
"""

from __future__ import annotations

import argparse
import math
import sys
from contextlib import contextmanager
from dataclasses import replace

import numpy as np

from . import charfit, efficiency, fock
from ._quad import integrate_window
from .config import SWEEP_PARAMETERS, ExperimentConfig, load_config
from .errors import AtomLoadError, ConfigError
from .field import dbm_to_watts
from .params import coherence_times, dephasing_ratio, transmon_frequency
from .waveform import photon_number

TRACE_COLUMNS = [
    "t_ns", "re_alpha_in", "im_alpha_in", "re_alpha_out", "im_alpha_out",
    "f_in", "f_out", "s_z", "re_s_minus", "im_s_minus",
]
VOLTAGE_COLUMNS = ["re_v_on", "im_v_on", "re_v_off", "im_v_off"]
SWEEP_COLUMNS = ["sweep_param_name", "sweep_value", "eta", "e_on", "e_off", "t_i_us", "t0_us", "t_f_us", "method"]
FOCK_COLUMNS = ["t_ns", "re_xi", "im_xi", "f_in", "f_out", "p_e", "re_c", "im_c"]


def provenance(cfg: ExperimentConfig, seed: int) -> str:
    return f"# atomload config_sha256={cfg.digest()} seed={seed}"


@contextmanager
def _sink(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def write_table(path, header: str, columns: list[str], table: np.ndarray) -> None:
    with _sink(path) as fh:
        fh.write(header + "\n")
        fh.write(",".join(columns) + "\n")
        np.savetxt(fh, table, fmt="%.12g", delimiter=",")


class Reporter:
    def __init__(self, quiet: bool, to_stderr: bool):
        self.quiet = quiet
        self.stream = sys.stderr if to_stderr else sys.stdout

    def __call__(self, text: str) -> None:
        if not self.quiet:
            print(text, file=self.stream)


def _seed(cfg: ExperimentConfig, override: int | None) -> int:
    if override is not None:
        return override
    return cfg.noise.seed if cfg.noise is not None else 0


def _noise(cfg: ExperimentConfig, seed: int):
    return None if cfg.noise is None else cfg.noise.model(seed)


def trace_table(ft) -> tuple[list[str], np.ndarray]:
    s_minus = ft.s_minus if ft.s_minus is not None else np.zeros_like(ft.alpha_in)
    s_z = ft.s_z if ft.s_z is not None else np.full(ft.t.size, -1.0)
    cols = [
        ft.t * 1e9, ft.alpha_in.real, ft.alpha_in.imag, ft.alpha_out.real, ft.alpha_out.imag,
        ft.f_in, ft.f_out, s_z, s_minus.real, s_minus.imag,
    ]
    names = list(TRACE_COLUMNS)
    if ft.v_on is not None:
        cols += [ft.v_on.real, ft.v_on.imag, ft.v_off.real, ft.v_off.imag]
        names += VOLTAGE_COLUMNS
    return names, np.column_stack(cols)


def run_simulate(cfg: ExperimentConfig, out, seed: int | None, say: Reporter) -> None:
    cfg.require("qubit", "pulse")
    p = cfg.qubit.params()
    spec = cfg.pulse.spec(p.z0)
    seed = _seed(cfg, seed)
    sim_kw = cfg.simulation.kwargs() if cfg.simulation is not None else {}
    res = efficiency.simulate(spec, p, noise=_noise(cfg, seed), **sim_kw)
    names, table = trace_table(res.field)
    write_table(out, provenance(cfg, seed), names, table)
    say(f"photon_number = {photon_number(res.spec, p):.6g}")
    if res.efficiency is not None:
        t_i, t0, t_f = res.efficiency.windows
        say(f"eta = {res.efficiency.eta:.6f}")
        say(f"eta_flux = {res.flux_efficiency.eta:.6f}")
        say(f"windows_us = {t_i * 1e6:.6g}, {t0 * 1e6:.6g}, {t_f * 1e6:.6g}")


def run_fock(cfg: ExperimentConfig, out, seed: int | None, say: Reporter) -> None:
    cfg.require("qubit")
    p = cfg.qubit.params()
    section = cfg.fock
    tau = fock.fock_tau_opt(p) if section is None or section.tau_ns is None else section.tau_ns * 1e-9
    dt = None if section is None or section.dt_ns is None else section.dt_ns * 1e-9
    grid = fock.fock_grid(tau, p, dt)
    xi = fock.xi_exp_rising(tau, grid)
    traj = fock.evolve_fock(xi, p)
    f_out = fock.fock_output_flux(traj, p)
    table = np.column_stack(
        [grid * 1e9, xi.xi.real, xi.xi.imag, np.abs(xi.xi) ** 2, f_out, traj.p_e, traj.c.real, traj.c.imag]
    )
    write_table(out, provenance(cfg, _seed(cfg, seed)), FOCK_COLUMNS, table)
    emitted = integrate_window(grid, f_out, 0.0, grid[-1])
    say(f"tau_ns = {tau * 1e9:.6g}")
    say(f"eta_closed_form = {fock.fock_efficiency(tau, p):.9f}")
    say(f"eta_numeric = {emitted / xi.norm():.9f}")


def _sweep_values(parameter: str, values: list[float]) -> list[float]:
    if parameter == "tau":
        return [v * 1e-9 for v in values]
    if parameter == "theta":
        return [math.radians(v) for v in values]
    return values


def run_sweep(cfg: ExperimentConfig, out, seed: int | None, say: Reporter) -> None:
    cfg.require("qubit", "pulse", "sweep")
    p = cfg.qubit.params()
    template = cfg.pulse.spec(p.z0)
    sw = cfg.sweep
    values = sw.grid()
    if not values:
        raise ConfigError("empty sweep")
    seed = _seed(cfg, seed)
    kwargs = dict(cfg.simulation.kwargs() if cfg.simulation is not None else {})
    kwargs["noise"] = _noise(cfg, seed)
    kwargs["workers"] = sw.workers
    if sw.parameter in ("m", "theta"):
        kwargs["m"] = cfg.pulse.phase_m if cfg.pulse.phase_m else 50
        theta = cfg.pulse.phase_theta_deg
        kwargs["theta"] = math.pi if theta is None else math.radians(theta)
        template = replace(template, phase_segments=None)
    rows = efficiency.sweep(p, template, sw.parameter, _sweep_values(sw.parameter, values), **kwargs)
    name = SWEEP_PARAMETERS[sw.parameter]
    with _sink(out) as fh:
        fh.write(provenance(cfg, seed) + "\n")
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for value, (_, res) in zip(values, rows):
            t_i, t0, t_f = (w * 1e6 for w in res.windows)
            fh.write(
                f"{name},{value:.12g},{res.eta:.12g},{res.e_on:.12g},{res.e_off:.12g},"
                f"{t_i:.12g},{t0:.12g},{t_f:.12g},{res.method.value}\n"
            )
    best = max(zip(values, rows), key=lambda item: item[1][1].eta)
    say(f"max eta = {best[1][1].eta:.6f} at {name} = {best[0]:.6g}")


def run_analytic(cfg: ExperimentConfig, out) -> None:
    cfg.require("qubit")
    p = cfg.qubit.params()
    t1, t2 = coherence_times(p)
    tau_c, eta_c = efficiency.optimal_tau(p, "coherent")
    tau_f = fock.fock_tau_opt(p)
    lines = [
        f"gamma_mhz = {p.gamma / 2 / math.pi / 1e6:.6g}",
        f"t1_ns = {t1 * 1e9:.6g}",
        f"t2_ns = {t2 * 1e9:.6g}",
        f"gamma_phi_over_gamma_r = {dephasing_ratio(p):.6g}",
        f"coherent_tau_opt_ns = {tau_c * 1e9:.6g}",
        f"coherent_eta_opt = {eta_c:.6f}",
        f"fock_tau_opt_ns = {tau_f * 1e9:.6g}",
        f"fock_eta_opt = {fock.fock_efficiency(tau_f, p):.6f}",
    ]
    energies = cfg.qubit.energies()
    if energies is not None:
        lines.append(f"ej_over_ec = {energies.ratio:.6g}")
        lines.append(f"f10_transmon_ghz = {transmon_frequency(energies) / 1e9:.6g}")
    with _sink(out) as fh:
        fh.write("\n".join(lines) + "\n")


def _read_columns(path) -> dict[str, np.ndarray]:
    try:
        data = np.genfromtxt(path, delimiter=",", names=True, comments="#", dtype=float)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    if data.dtype.names is None:
        raise ConfigError(f"{path} has no header row")
    data = np.atleast_1d(data)
    return {name: np.asarray(data[name], dtype=float) for name in data.dtype.names}


def run_fit(cfg: ExperimentConfig | None, data_path, out, say: Reporter) -> None:
    cols = _read_columns(data_path)
    if {"omega_ghz", "re_r", "im_r"} <= cols.keys():
        omega_p = cols["omega_ghz"] * 2 * math.pi * 1e9
        result = charfit.fit_spectrum(omega_p, cols["re_r"] + 1j * cols["im_r"])
        text = result.as_text()
    elif {"p_dbm", "abs_r"} <= cols.keys():
        if cfg is None:
            raise ConfigError("a power-scan fit needs --config with a [qubit] section")
        cfg.require("qubit")
        p = cfg.qubit.params()
        watts = np.array([dbm_to_watts(x) for x in cols["p_dbm"]])
        k, k_err = charfit.fit_power_scan(watts, cols["abs_r"], p.gamma_r, p.gamma)
        text = f"k_coupling = {k:.9e}\nstderr_k_coupling = {k_err:.3e}"
    else:
        raise ConfigError("data needs columns omega_ghz,re_r,im_r or p_dbm,abs_r")
    with _sink(out) as fh:
        fh.write(text + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atomload", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("simulate", "simulate one pulse and write the field trace"),
        ("fock", "simulate single-photon loading"),
        ("sweep", "efficiency versus tau, n, m or theta"),
        ("fit", "fit reflection data"),
        ("analytic", "closed-form efficiencies and optimal time constants"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=name != "fit", help="INI experiment file")
        cmd.add_argument("--out", help="output path (default: stdout)")
        cmd.add_argument("--seed", type=int, help="override the noise seed")
        cmd.add_argument("--quiet", action="store_true", help="suppress the summary")
        if name == "fit":
            cmd.add_argument("--data", required=True, help="CSV with omega_ghz,re_r,im_r or p_dbm,abs_r")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    say = Reporter(args.quiet, to_stderr=args.out in (None, "-"))
    try:
        cfg = load_config(args.config) if args.config else None
        if args.command == "simulate":
            run_simulate(cfg, args.out, args.seed, say)
        elif args.command == "fock":
            run_fock(cfg, args.out, args.seed, say)
        elif args.command == "sweep":
            run_sweep(cfg, args.out, args.seed, say)
        elif args.command == "analytic":
            run_analytic(cfg, args.out)
        else:
            run_fit(cfg, args.data, args.out, say)
    except ConfigError as exc:
        print(f"atomload: config error: {exc}", file=sys.stderr)
        return 1
    except (AtomLoadError, ArithmeticError, ValueError) as exc:
        module = getattr(exc, "module", None)
        tag = f" ({module})" if module else ""
        print(f"atomload: numeric failure{tag}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
