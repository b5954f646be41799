import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atomload.dynamics import bloch_rhs, evolve, steady_state, weak_drive_closed_form
from atomload.errors import GridError, IntegrationError
from atomload.params import SAMPLE1, SAMPLE1_T_OFF, QubitParams
from atomload.waveform import DriveTrace, PulseSpec, drive_trace, pulse_grid

P = SAMPLE1


def constant_drive(omega, duration, dt):
    t = dt * np.arange(int(round(duration / dt)) + 1)
    return DriveTrace(t, np.full(t.size, omega, dtype=complex))


def exp_drive(tau, omega_peak, p=P, t_off=SAMPLE1_T_OFF, dt=None):
    spec = PulseSpec("exp_rising", tau, 0.0, t_off, amplitude=1.0)
    grid = pulse_grid(spec, p, post_window=0.0, dt=dt)
    d = drive_trace(spec, p, grid)
    scale = omega_peak / np.max(np.abs(d.omega))
    return DriveTrace(d.t, d.omega * scale, d.stages * scale)


def test_ground_state_is_fixed_point():
    tr = evolve(constant_drive(0.0, 1e-6, 1e-9), P)
    assert np.all(tr.s_minus == 0)
    assert np.all(tr.s_z == -1)


def test_free_decay():
    tr = evolve(constant_drive(0.0, 1e-6, 0.5e-9), P, initial=(0.0, 1.0))
    assert np.allclose(tr.s_z, -1 + 2 * np.exp(-P.gamma_r * tr.t), rtol=0, atol=1e-10)
    assert np.all(tr.s_minus == 0)
    assert np.array_equal(tr.p_e, 0.5 * (1 + tr.s_z))


def test_free_decay_bloch_norm_is_not_monotone():
    # the vector passes through the centre of the ball and grows back to the ground state
    tr = evolve(constant_drive(0.0, 1e-6, 0.5e-9), P.with_dephasing(0.0), initial=(0.0, 1.0))
    norm = tr.bloch_norm()
    assert norm.min() < 1e-3
    assert norm[-1] > 0.99
    assert np.all(norm <= 1 + 1e-12)


def test_constant_drive_reaches_steady_state():
    omega = 0.3 * P.gamma
    tr = evolve(constant_drive(omega, 40 / P.gamma, 0.2e-9), P)
    s, z = steady_state(omega, P)
    assert z == pytest.approx(-1 / (1 + omega**2 / (P.gamma_r * P.gamma)), rel=1e-14)
    assert tr.s_z[-1] == pytest.approx(z, rel=1e-9)
    assert tr.s_minus[-1] == pytest.approx(s, rel=1e-9)
    r = 1 + 2 * P.gamma_r * tr.s_minus[-1] / omega
    assert abs(r) == pytest.approx(abs(1 - P.gamma_r**2 / (P.gamma_r * P.gamma + omega**2)), abs=1e-6)


def test_weak_drive_closed_form_values():
    tau = 145e-9
    assert (P.gamma + 1 / tau) / (2 * math.pi) / 1e6 == pytest.approx(2.054, abs=1e-3)
    omega0 = P.gamma / 100
    assert weak_drive_closed_form(1e9, omega0, P) == pytest.approx(-omega0 / (2 * P.gamma), rel=1e-8)
    tr = evolve(exp_drive(tau, omega0), P)
    expected = weak_drive_closed_form(tau, omega0, P, duration=SAMPLE1_T_OFF)
    assert abs(tr.s_minus[-1] / expected - 1) < 3e-4


@settings(max_examples=50, deadline=None)
@given(
    s_re=st.floats(-0.5, 0.5),
    s_im=st.floats(-0.5, 0.5),
    z=st.floats(-1, 1),
    omega=st.floats(-1e8, 1e8),
)
def test_rhs_reduces_to_real_drive_equations(s_re, s_im, z, omega):
    s = complex(s_re, s_im)
    ds, dz = bloch_rhs(s, z, omega, P)
    # real-drive equations written out component-wise
    assert ds == pytest.approx(-P.gamma * s + omega * z / 2, rel=1e-12, abs=1e-3)
    assert dz == pytest.approx(-P.gamma_r * (1 + z) - omega * (s + s.conjugate()).real, rel=1e-12, abs=1e-3)


def test_global_phase_covariance():
    rng = np.random.default_rng(7)
    base = exp_drive(166e-9, 2.0 * P.gamma, dt=1e-9)
    ref = evolve(base, P)
    for phi in rng.uniform(0, 2 * math.pi, 100):
        amp = rng.uniform(0.2, 1.5)
        d = DriveTrace(base.t, base.omega * amp, base.stages * amp)
        a = evolve(d, P)
        b = evolve(d.rotated(phi), P)
        assert np.max(np.abs(b.s_minus - np.exp(1j * phi) * a.s_minus)) < 1e-10
        assert np.max(np.abs(b.s_z - a.s_z)) < 1e-10
    assert ref.s_z.max() > -1


def test_step_halving_converges():
    omega = 1.5 * P.gamma
    a = evolve(exp_drive(166e-9, omega), P)
    dt = a.t[1] - a.t[0]
    b = evolve(exp_drive(166e-9, omega, dt=dt / 2), P)
    assert b.t[-1] == pytest.approx(a.t[-1])
    assert abs(b.s_minus[-1] / a.s_minus[-1] - 1) < 1e-8
    assert abs(b.s_z[-1] / a.s_z[-1] - 1) < 1e-8


def test_strong_drive_stays_in_bloch_ball():
    p = QubitParams.from_cyclic(1.686e6, 0.0, 4.85e9)
    tr = evolve(constant_drive(20 * p.gamma, 2e-6, 0.1e-9), p)
    assert np.all(tr.bloch_norm() <= 1 + 1e-9)
    assert np.all(np.abs(tr.s_z) <= 1 + 1e-9)


def test_detuned_steady_state():
    delta = 2 * P.gamma
    omega = 1e-3 * P.gamma
    tr = evolve(constant_drive(omega, 40 / P.gamma, 0.2e-9), P, detuning=delta)
    s, z = steady_state(omega, P, delta)
    assert tr.s_minus[-1] == pytest.approx(s, rel=1e-8)


def test_nonuniform_grid_rejected():
    t = np.array([0.0, 1e-9, 3e-9, 4e-9])
    with pytest.raises(GridError) as err:
        evolve(DriveTrace(t, np.zeros(4)), P)
    assert err.value.code == "grid-nonuniform"


def test_divergence_reported():
    with pytest.raises(IntegrationError) as err:
        evolve(constant_drive(1e250, 1e-6, 1e-8), P)
    assert err.value.code == "integration-diverged"


def test_initial_state_outside_ball_rejected():
    with pytest.raises(ValueError):
        evolve(constant_drive(0.0, 1e-7, 1e-9), P, initial=(0.5, 0.5))
