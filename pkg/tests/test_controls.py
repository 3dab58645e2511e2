import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from qlink.constants import mhz
from qlink.controls import (DEFAULT_SPAN, Control, SechWavepacket, reabsorption_delay,
                            reabsorption_schedule, sech_pulse, sech_spectrum,
                            spectral_moment, stirap_schedule, transfer_schedule)
from qlink.errors import ConfigurationError, DomainError
from qlink.protocols import propagation_time
from qlink.waveguide import WaveguideSpec, central_group_velocity

K = mhz(1)
rates = st.floats(1e5, 1e9)


def test_peak_is_half_kappa():
    assert sech_pulse(0.0, K, K) == pytest.approx(K / 2, rel=1e-14)


def test_left_asymptote():
    kt, k = 0.5 * K, K
    t = -60.0 / kt
    expected = 0.5 * (k + kt) * math.sqrt(kt / k) * math.exp(0.5 * kt * t)
    assert sech_pulse(t, kt, k) == pytest.approx(expected, rel=1e-10)


def test_right_tail_for_equal_rates():
    t = 60.0 / K
    assert sech_pulse(t, K, K) == pytest.approx(K * math.exp(-0.5 * K * t), rel=1e-10)


def test_extreme_arguments_do_not_overflow():
    with np.errstate(all="raise"):
        g = sech_pulse(np.array([-700.0, 700.0]) / K, 0.3 * K, K)
    assert np.all(np.isfinite(g)) and np.all(g >= 0)


def test_branches_meet_at_zero():
    kt, k = 0.7 * K, K
    eps = 1e-9 / kt
    assert sech_pulse(-eps, kt, k) == pytest.approx(sech_pulse(eps, kt, k), rel=1e-8)


def test_bandwidth_above_kappa_is_rejected():
    with pytest.raises(DomainError):
        sech_pulse(0.0, 2 * K, K)
    with pytest.raises(DomainError):
        transfer_schedule(K, 0.5 * K, K, 1e-7)


@given(st.floats(1.0, 40.0), st.floats(-50.0, 50.0))
def test_pulse_bounded_by_half_kappa(eta, x):
    kt = K / eta
    g = sech_pulse(x / kt, kt, K)
    assert 0.0 <= g <= K / 2 + 1e-12 * K


def test_transfer_mirror_symmetry():
    s = transfer_schedule(K, K, K, 1.6e-7)
    t = np.linspace(-s.half_length, s.half_length, 101)
    assert np.array_equal(s.g2(t), s.g1(-t))


def test_transfer_duration_at_30m():
    spec = WaveguideSpec(30.0)
    tp = propagation_time(spec)
    s = transfer_schedule(K, K, K, tp)
    assert tp == pytest.approx(0.16e-6, rel=0.02)
    assert s.duration == pytest.approx(tp + DEFAULT_SPAN / K, rel=1e-14)
    assert s.delay == tp and s.narrowing == 1.0


@pytest.mark.parametrize("eta", [1.0, 4.0, 10.0])
def test_transfer_boundaries_vanish(eta):
    s = transfer_schedule(K, K, K / eta, propagation_time(WaveguideSpec(30.0)))
    T = s.half_length
    assert s.g1(-T) <= mhz(1e-5)
    assert s.g2(T) <= mhz(1e-5)


def test_stirap_endpoints_and_midpoint():
    g0, T = 2.0, 3.0
    s = stirap_schedule(g0, T)
    assert s.g1(-T) == pytest.approx(0.0, abs=1e-15)
    assert s.g2(-T) == pytest.approx(g0)
    assert s.g1(T) == pytest.approx(g0)
    assert s.g2(T) == pytest.approx(0.0, abs=1e-15)
    assert s.g1(0.0) == pytest.approx(g0 / math.sqrt(2))
    assert s.g2(0.0) == pytest.approx(g0 / math.sqrt(2))


@given(rates, st.floats(1e-8, 1e-4), st.floats(-1.0, 1.0))
def test_stirap_pythagorean(g0, T, x):
    s = stirap_schedule(g0, T)
    t = x * T
    assert s.g1(t) ** 2 + s.g2(t) ** 2 == pytest.approx(g0 ** 2, rel=1e-12)


def test_stirap_rejects_nonpositive():
    with pytest.raises(DomainError):
        stirap_schedule(0.0, 1.0)


def test_reabsorption_delay_at_5m():
    spec = WaveguideSpec(5.0)
    k = mhz(100)
    vg = central_group_velocity(spec)
    td = reabsorption_delay(k, 5.0, vg)
    assert 2 * 5.0 / vg == pytest.approx(53.4e-9, rel=0.02)
    assert 2 / k == pytest.approx(3.18e-9, rel=1e-3)
    assert td == pytest.approx(2 * 5.0 / vg + 2 / k, rel=1e-14)


def test_reabsorption_symmetry_and_continuity():
    spec = WaveguideSpec(5.0)
    k = mhz(100)
    s = reabsorption_schedule(k / 2, k, 5.0, central_group_velocity(spec))
    t = np.linspace(0, s.half_length, 77)
    assert np.array_equal(s.g1(t), s.g1(-t))
    assert s.g1(0.0) == sech_pulse(0.5 * s.delay, k / 2, k)
    assert not np.any(s.g2(t))
    assert s.warnings == ()


def test_reabsorption_long_photon_warns():
    spec = WaveguideSpec(5.0)
    k = mhz(3)
    with pytest.warns(UserWarning, match="overlap"):
        s = reabsorption_schedule(k, k, 5.0, central_group_velocity(spec))
    assert len(s.warnings) == 1


def test_constant_control():
    assert Control.constant(0.0).kind == 0
    assert Control.constant(3.0)(np.array([1.0, 2.0])).tolist() == [3.0, 3.0]


def test_wavepacket_widths_and_norm():
    wp = SechWavepacket(0.0, K)
    assert wp.temporal_width * wp.bandwidth == pytest.approx(math.pi / math.sqrt(3))
    norm, _ = integrate.quad(lambda w: wp.amplitude(w) ** 2, -20 * K, 20 * K, limit=200)
    assert norm == pytest.approx(1.0, rel=1e-10)
    tnorm, _ = integrate.quad(lambda t: wp.temporal_amplitude(t) ** 2, -60 / K, 60 / K, limit=200)
    assert tnorm == pytest.approx(1.0, rel=1e-10)


def test_pulse_area_constraint():
    kt = K / 2
    wp = SechWavepacket(0.0, kt)
    t = np.linspace(-40 / kt, 40 / kt, 4001)
    psi2 = wp.temporal_amplitude(t) ** 2
    emitted = 0.5 * (1 + np.tanh(0.5 * kt * t))
    load = psi2 / K + emitted
    assert np.all(load >= 0) and np.all(load <= 1 + 1e-12)


def _grid(kt, n=4001, reach=12.0):
    return np.linspace(-reach * kt, reach * kt, n)


def test_spectrum_symmetric_and_normalized():
    w = _grid(K)
    f = sech_spectrum(SechWavepacket(0.0, K), w)
    assert np.sum(f ** 2) == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(f, f[::-1], rtol=1e-12, atol=0)


def test_spectrum_moments():
    kt = K
    w = _grid(kt)
    f = sech_spectrum(SechWavepacket(0.0, kt), w)
    assert spectral_moment(f, w, 0.0, 2) == pytest.approx(kt ** 2 / 12, rel=1e-3)
    assert spectral_moment(f, w, 0.0, 4) == pytest.approx(7 * kt ** 4 / 240, rel=1e-3)


def test_spectrum_rejects_narrow_grid():
    with pytest.raises(ConfigurationError, match="misses"):
        sech_spectrum(SechWavepacket(0.0, K), _grid(K, reach=2.0))
    with pytest.raises(ConfigurationError):
        sech_spectrum(SechWavepacket(0.0, K), [0.0])


def test_transfer_schedule_sits_in_window():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        s = transfer_schedule(K, 2 * K, K, 1e-7)
    assert s.t_span == (-s.half_length, s.half_length)
    assert s.packed().shape == (2, 5)
