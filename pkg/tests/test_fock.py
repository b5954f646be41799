import math

import numpy as np
import pytest

from atomload._quad import integrate_window
from atomload.efficiency import eta_matched
from atomload.fock import (
    PhotonWaveform,
    evolve_fock,
    fock_efficiency,
    fock_efficiency_numeric,
    fock_grid,
    fock_output_flux,
    fock_output_flux_closed_form,
    fock_tau_opt,
    xi_exp_rising,
)
from atomload.params import SAMPLE1, SAMPLE2

P = SAMPLE1


def run(tau, p=P):
    grid = fock_grid(tau, p)
    xi = xi_exp_rising(tau, grid)
    traj = evolve_fock(xi, p)
    return grid, xi, traj, fock_output_flux(traj, p)


def test_waveform_peak_and_norm():
    tau = 145e-9
    grid = fock_grid(tau, P)
    xi = xi_exp_rising(tau, grid)
    i0 = int(np.argmin(np.abs(grid)))
    assert grid[i0] == 0.0
    assert xi.xi[i0] == pytest.approx(math.sqrt(2 / tau))
    assert np.all(xi.xi[grid > 0] == 0)
    assert xi.norm() == pytest.approx(1.0, abs=1e-6)
    flux = np.abs(xi.xi[grid < 0]) ** 2
    assert np.allclose(flux, 2 / tau * np.exp(2 * grid[grid < 0] / tau), rtol=1e-12)


def test_no_photon_stays_in_ground_state():
    grid = fock_grid(145e-9, P)
    zero = PhotonWaveform(grid, np.zeros(grid.size, complex))
    traj = evolve_fock(zero, P)
    assert np.all(traj.c == 0) and np.all(traj.s_z == -1)
    assert np.all(fock_output_flux(traj, P) == 0)


def test_coherence_follows_linear_solution():
    tau = 145e-9
    grid, xi, traj, _ = run(tau)
    sel = (grid < 0) & (grid > -3 * tau)
    expected = math.sqrt(P.gamma_r) * math.sqrt(2 / tau) * np.exp(grid[sel] / tau) / (P.gamma + 1 / tau)
    assert np.max(np.abs(traj.c[sel] / expected - 1)) < 1e-7


def test_population_peaks_at_turn_off_then_decays():
    p = SAMPLE2
    tau = fock_tau_opt(p)
    grid, xi, traj, _ = run(tau, p)
    i0 = int(np.argmax(traj.p_e))
    assert abs(grid[i0]) <= grid[1] - grid[0]
    after = grid > 0
    expected = traj.p_e[grid == 0][0] * np.exp(-p.gamma_r * grid[after])
    assert np.allclose(traj.p_e[after], expected, rtol=1e-7, atol=1e-14)


def test_output_flux_matches_closed_form():
    tau = 145e-9
    grid, xi, traj, f_out = run(tau)
    closed = fock_output_flux_closed_form(grid, tau, P)
    before = (grid < 0) & (grid > -5 * tau)
    after = (grid > 0) & (grid < 5 / P.gamma_r)
    assert np.max(np.abs(f_out[before] / closed[before] - 1)) < 1e-6
    assert np.max(np.abs(f_out[after] / closed[after] - 1)) < 1e-6


def test_reflection_before_turn_off_is_proportional_to_input():
    grid, xi, traj, f_out = run(120e-9)
    sel = (grid < 0) & (grid > -5 * 120e-9)
    ratio = f_out[sel] / np.abs(xi.xi[sel]) ** 2
    assert np.ptp(ratio) < 1e-6 * ratio.mean()
    assert ratio.mean() == pytest.approx(1 - fock_efficiency(120e-9, P), rel=1e-6)


def test_ideal_time_reversal():
    p = P.with_dephasing(0.0)
    assert fock_efficiency(2 / p.gamma_r, p) == pytest.approx(1.0, rel=1e-15)
    assert fock_tau_opt(p) == pytest.approx(2 / p.gamma_r, rel=1e-15)


@pytest.mark.parametrize("p, target, tau_ns, tau_gamma", [(SAMPLE1, 0.938, 177, 1.879), (SAMPLE2, 0.985, 153, 1.970)])
def test_optimum_per_sample(p, target, tau_ns, tau_gamma):
    tau = fock_tau_opt(p)
    assert tau * 1e9 == pytest.approx(tau_ns, abs=0.5)
    assert tau * p.gamma_r == pytest.approx(tau_gamma, abs=2e-3)
    assert fock_efficiency(tau, p) == pytest.approx(target, abs=1e-3)


def test_optimum_is_global_on_log_grid():
    tau_opt = fock_tau_opt(P)
    best = fock_efficiency(tau_opt, P)
    for tau in np.geomspace(0.01, 100, 400) / P.gamma_r:
        assert fock_efficiency(tau, P) <= best


@pytest.mark.parametrize("mult", [0.5, 1, 2, 4])
def test_numeric_efficiency_matches_closed_form(mult):
    tau = mult / P.gamma_r
    assert fock_efficiency_numeric(tau, P) == pytest.approx(fock_efficiency(tau, P), rel=1e-6)


def test_single_photon_beats_matched_coherent_pulse():
    for p in (SAMPLE1, SAMPLE2, SAMPLE1.with_dephasing(0.5 * SAMPLE1.gamma_r)):
        assert fock_efficiency(fock_tau_opt(p), p) > eta_matched(p)


def test_photon_conservation_without_dephasing():
    p = P.with_dephasing(0.0)
    grid, xi, traj, f_out = run(0.7 / p.gamma_r, p)
    total = integrate_window(grid, f_out, grid[0], 0.0) + integrate_window(grid, f_out, 0.0, grid[-1])
    assert total == pytest.approx(1.0, abs=1e-6)


def test_invalid_tau():
    with pytest.raises(ValueError):
        fock_efficiency(0.0, P)
