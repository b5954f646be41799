import math
from dataclasses import replace

import numpy as np
import pytest

from atomload.efficiency import (
    Method,
    analytic_result,
    coherent_tau_opt,
    eta_analytic_coherent,
    eta_matched,
    eta_windowed,
    golden_section_max,
    optimal_tau,
    simulate,
    sweep,
    sweep_phase,
    sweep_photon_number,
    sweep_tau,
)
from atomload.errors import EfficiencyError
from atomload.field import NoiseModel
from atomload.fock import fock_efficiency, fock_tau_opt
from atomload.params import SAMPLE1, SAMPLE1_T_OFF, SAMPLE2, SAMPLE2_T_OFF

P = SAMPLE1


def template(tau=166e-9, n=1e-4, p_t_off=SAMPLE1_T_OFF, shape="exp_rising"):
    from atomload.waveform import PulseSpec

    return PulseSpec(shape, tau, 0.0, p_t_off, target_n=n)


class TestWindowed:
    def test_delayed_copy_gives_unity(self):
        t = np.linspace(0, 10e-6, 10001)
        shape = lambda x: np.where((x > 1e-6) & (x < 3e-6), np.sin(np.pi * (x - 1e-6) / 2e-6) ** 2, 0.0)
        res = eta_windowed(t, shape(t - 4e-6), shape(t), (0.0, 4e-6, 10e-6))
        assert res.eta == pytest.approx(1.0, rel=1e-9)
        assert res.method is Method.WINDOWED_VOLTAGE

    def test_reference_buried_in_noise(self):
        t = np.linspace(0, 1e-6, 101)
        with pytest.raises(EfficiencyError) as err:
            eta_windowed(t, np.zeros(101), np.full(101, 1e-12), (0.0, 0.5e-6, 1e-6), NoiseModel(v_n=1e-9))
        assert err.value.code == "reference-energy-nonpositive"

    def test_window_order(self):
        t = np.linspace(0, 1e-6, 101)
        with pytest.raises(ValueError):
            eta_windowed(t, np.ones(101), np.ones(101), (0.5e-6, 0.2e-6, 1e-6))

    def test_noise_floor_subtraction_unbiased(self):
        spec = template(tau=P.t2, n=0.09)
        clean = simulate(spec, P).efficiency.eta
        etas = []
        for seed in range(20):
            noise = NoiseModel(v_n=0.6e-9, seed=seed, bin_width=2e-9, gain_db=68.0)
            etas.append(simulate(spec, P, noise=noise).efficiency.eta)
        etas = np.array(etas)
        sem = etas.std(ddof=1) / math.sqrt(etas.size)
        assert abs(etas.mean() - clean) < 4 * sem + 0.02

    def test_noiseless_eta_bounded(self):
        for n in (1e-4, 0.1, 2.0):
            eta = simulate(template(tau=90e-9, n=n), P).efficiency.eta
            assert 0 <= eta <= 1 + 1e-9


class TestClosedForms:
    def test_matched_tau(self):
        for p in (SAMPLE1, SAMPLE2):
            assert eta_analytic_coherent(1 / p.gamma, p) == pytest.approx(p.gamma_r**2 / (4 * p.gamma**2), rel=1e-14)
            assert eta_analytic_coherent(1 / p.gamma, p) == pytest.approx(eta_matched(p), rel=1e-14)

    def test_sample1_at_145ns(self):
        assert eta_analytic_coherent(145e-9, P) == pytest.approx(0.774, abs=5e-4)

    def test_limits(self):
        assert eta_analytic_coherent(1e-15, P) < 1e-6
        assert eta_analytic_coherent(1.0, P) < 1e-4
        with pytest.raises(ValueError):
            eta_analytic_coherent(0.0, P)

    def test_coherent_optimum(self):
        assert coherent_tau_opt(SAMPLE1) * 1e9 == pytest.approx(166, abs=0.5)
        assert coherent_tau_opt(SAMPLE2) * 1e9 == pytest.approx(151, abs=0.5)
        clean = P.with_dephasing(0.0)
        assert coherent_tau_opt(clean) == pytest.approx(2 / clean.gamma_r)
        taus = np.geomspace(0.05, 20, 2001) / P.gamma
        etas = [eta_analytic_coherent(t, P) for t in taus]
        assert taus[int(np.argmax(etas))] == pytest.approx(1 / P.gamma, rel=5e-3)

    def test_golden_section_finds_optima(self):
        tau, eta = optimal_tau(P, "coherent")
        assert tau == pytest.approx(1 / P.gamma, rel=1e-5)
        assert eta == pytest.approx(eta_matched(P), rel=1e-10)
        tau, eta = optimal_tau(P, "fock")
        assert tau == pytest.approx(fock_tau_opt(P), rel=1e-5)
        x, fx = golden_section_max(lambda x: -((x - 0.3) ** 2), 0.0, 1.0, rtol=1e-9)
        assert x == pytest.approx(0.3, abs=1e-8)

    def test_single_photon_ordering(self):
        for tau in np.geomspace(0.1, 10, 30) / P.gamma:
            assert fock_efficiency(tau, P) >= eta_analytic_coherent(tau, P)

    def test_analytic_result_records_method(self):
        assert analytic_result(166e-9, P).method is Method.ANALYTIC_COHERENT
        assert analytic_result(166e-9, P, "fock").eta == fock_efficiency(166e-9, P)


class TestSweeps:
    def test_single_point_equals_pipeline(self):
        (tau, res), = sweep_tau(P, template(), [120e-9])
        direct = simulate(replace(template(), tau=120e-9), P).efficiency
        assert res.eta == pytest.approx(direct.eta, rel=1e-9)

    def test_tau_sweep_keeps_photon_number(self):
        from atomload.efficiency import amplitude_for_tau
        from atomload.waveform import photon_number, resolve_amplitude

        base = template()
        v = resolve_amplitude(base, P)
        for tau in (40e-9, 400e-9):
            spec = replace(base, tau=tau, amplitude=amplitude_for_tau(base, v, tau), target_n=None)
            assert photon_number(spec, P) == pytest.approx(1e-4, rel=1e-9)

    def test_weak_drive_peak_near_inverse_gamma(self):
        taus = np.linspace(0.5, 1.5, 21) / P.gamma
        etas = [r.eta for _, r in sweep_tau(P, template(), taus)]
        best = taus[int(np.argmax(etas))]
        assert 0.9 / P.gamma <= best <= 1.1 / P.gamma

    def test_sample2_weak_plateau(self):
        (_, res), = sweep_photon_number(SAMPLE2, template(151e-9, p_t_off=SAMPLE2_T_OFF), [1e-4])
        assert res.eta == pytest.approx(0.942, abs=0.01)

    def test_no_modulation_equals_plain_pipeline(self):
        t = template(n=0.015)
        (_, res), = sweep_phase(P, t, "m", [0])
        assert res.eta == pytest.approx(simulate(t, P).efficiency.eta, rel=1e-14)

    def test_theta_sweep_symmetric_with_minimum_at_pi(self):
        thetas = np.linspace(0, 2 * math.pi, 9)
        etas = np.array([r.eta for _, r in sweep_phase(P, template(n=0.015), "theta", thetas, m=50)])
        assert int(np.argmin(etas)) == 4
        assert np.allclose(etas, etas[::-1], rtol=1e-6)
        assert etas[0] == etas.max()

    def test_workers_do_not_change_order(self):
        taus = [60e-9, 300e-9, 120e-9, 200e-9]
        a = sweep_tau(P, template(), taus, workers=1)
        b = sweep_tau(P, template(), taus, workers=3)
        assert [x for x, _ in b] == taus
        assert [r.eta for _, r in a] == [r.eta for _, r in b]

    def test_overlapping_shapes_rejected(self):
        for shape in ("gaussian", "exp_decaying"):
            with pytest.raises(EfficiencyError) as err:
                sweep(P, template(shape=shape), "tau", [100e-9])
            assert err.value.code == "no-time-separation"
        assert simulate(template(shape="gaussian"), P).efficiency is None

    def test_bad_sweeps(self):
        with pytest.raises(ValueError):
            sweep(P, template(), "tau", [])
        with pytest.raises(ValueError):
            sweep(P, template(), "width", [1.0])
        with pytest.raises(ValueError):
            sweep(P, template(), "tau", [-1e-9])
