import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlink.constants import SPEED_OF_LIGHT, ghz, mhz
from qlink.errors import ConfigurationError, DomainError
from qlink.nodes import NodeSpec
from qlink.waveguide import (WaveguideSpec, central_group_velocity, coupling_table,
                             dispersion_at, free_spectral_range, mode_frequency,
                             nearest_mode, sech_tail_weight, select_mode_window)

L30 = WaveguideSpec(30.0)
WC = ghz(8.4)


def test_cutoff_is_656_ghz():
    assert L30.cutoff / (2 * math.pi) == pytest.approx(6.557e9, rel=1e-3)
    assert np.all(mode_frequency(L30, np.arange(1, 50)) >= L30.cutoff)


def test_central_mode_at_30m():
    assert L30.central_mode == 1051


def test_mode_slope_approaches_c_pi_over_l():
    m = 10 ** 7
    assert mode_frequency(L30, m) / m == pytest.approx(SPEED_OF_LIGHT * math.pi / 30.0, rel=1e-6)


@given(st.floats(0.5, 200.0), st.integers(1, 5000))
def test_modes_increase(length, m):
    s = WaveguideSpec(length)
    assert mode_frequency(s, m + 1) > mode_frequency(s, m)


def test_group_velocity_and_curvature_at_84ghz():
    d = dispersion_at(L30, WC)
    assert d.group_velocity == pytest.approx(2 * SPEED_OF_LIGHT / 3, rel=0.1)
    assert d.curvature == pytest.approx(1.0e6, rel=0.1)
    assert 0 < d.group_velocity < SPEED_OF_LIGHT and d.curvature > 0


def test_free_space_limit():
    d = dispersion_at(L30, 1e6 * L30.cutoff)
    assert d.group_velocity == pytest.approx(SPEED_OF_LIGHT, rel=1e-9)
    assert d.curvature < 1e-6 * dispersion_at(L30, WC).curvature


def test_below_cutoff_is_a_domain_error():
    with pytest.raises(DomainError, match="evanescent"):
        dispersion_at(L30, 0.9 * L30.cutoff)
    with pytest.raises(ConfigurationError):
        WaveguideSpec(30.0, center_frequency=0.5 * L30.cutoff)


@given(st.integers(200, 4000))
def test_dispersion_matches_finite_differences(m):
    s = L30
    dk = math.pi / s.length
    w = mode_frequency(s, np.array([m - 1, m, m + 1]))
    d = dispersion_at(s, w[1])
    assert d.k == pytest.approx(m * dk, rel=1e-12)
    assert d.group_velocity * w[1] / SPEED_OF_LIGHT ** 2 == pytest.approx(d.k, rel=1e-12)
    vg_fd = (w[2] - w[0]) / (2 * dk)
    D_fd = (w[2] - 2 * w[1] + w[0]) / dk ** 2
    assert vg_fd == pytest.approx(d.group_velocity, rel=1e-6)
    assert D_fd == pytest.approx(d.curvature, rel=1e-6)


def test_free_spectral_range():
    fsr = free_spectral_range(L30, WC)
    assert fsr / (2 * math.pi) == pytest.approx(3.1e6, rel=0.02)
    vg = dispersion_at(L30, WC).group_velocity
    assert abs(fsr - vg * math.pi / 30.0) / fsr < 1e-3
    assert free_spectral_range(WaveguideSpec(60.0), WC) == pytest.approx(0.5 * fsr, rel=1e-3)


def test_nearest_mode_ties_go_down():
    s = WaveguideSpec(1.0, speed_of_light=1.0, broad_wall=1.0, center_frequency=10.0)
    w = 0.5 * (mode_frequency(s, 3) + mode_frequency(s, 4))
    assert nearest_mode(s, w) == 3


def _pair(spec, kappa1, kappa2=None):
    w = mode_frequency(spec, spec.central_mode)
    return (NodeSpec(w, w, kappa1), NodeSpec(w, w, kappa1 if kappa2 is None else kappa2))


def test_coupling_signs_and_symmetry():
    table = coupling_table(L30, _pair(L30, mhz(1)))
    assert np.all(table.node(1) > 0)
    assert np.allclose(np.abs(table.node(2)), table.node(1))
    assert np.array_equal(np.sign(table.node(2)), np.where(table.modes % 2 == 0, 1.0, -1.0))


def test_coupling_scaling():
    t1 = coupling_table(L30, _pair(L30, mhz(1)))
    t4 = coupling_table(L30, _pair(L30, mhz(4)))
    assert np.allclose(t4.node(1), 2 * t1.node(1), rtol=1e-14)
    ratio = t1.node(1) ** 2 / t1.frequencies
    assert np.allclose(ratio, ratio[0], rtol=1e-12)


@pytest.mark.parametrize("length", [1.0, 5.0, 30.0])
def test_fermi_golden_rule(length):
    s = WaveguideSpec(length)
    k = mhz(1)
    table = coupling_table(s, _pair(s, k))
    i = s.central_mode - table.modes[0]
    fsr = free_spectral_range(s, table.frequencies[i])
    assert 2 * math.pi * table.node(1)[i] ** 2 / fsr == pytest.approx(k, rel=1e-2)


def test_detached_node_has_zero_column():
    w = mode_frequency(L30, L30.central_mode)
    table = coupling_table(L30, (NodeSpec(w, w, mhz(1)), None))
    assert not np.any(table.node(2))


def test_full_band_window():
    assert L30.window == (1, 2 * 1051 - 1)
    assert WaveguideSpec(30.0, mode_window=(1000, 1100)).modes().size == 101
    with pytest.raises(ConfigurationError):
        WaveguideSpec(30.0, mode_window=(10, 5))


def test_window_holds_photon():
    kt = mhz(10)
    tol = 1e-8
    lo, hi = select_mode_window(L30, kt, tol)
    mc = L30.central_mode
    wc = mode_frequency(L30, mc)
    reach = min(wc - mode_frequency(L30, lo), mode_frequency(L30, hi) - wc)
    assert sech_tail_weight(reach, kt) <= tol
    # minimal: one mode fewer on each side no longer holds the photon
    inner = min(wc - mode_frequency(L30, lo + 1), mode_frequency(L30, hi - 1) - wc)
    assert sech_tail_weight(inner, kt) > tol
    assert reach >= kt / math.pi * 0.5 * math.log(2 / tol)


def test_window_minimum_and_errors():
    assert select_mode_window(L30, mhz(0.001), 0.5) == (1050, 1052)
    with pytest.raises(ConfigurationError):
        select_mode_window(WaveguideSpec(0.5), ghz(5.0), 1e-8)
    with pytest.raises(DomainError):
        select_mode_window(L30, mhz(1), 1.5)


@given(st.floats(1e5, 1e9), st.floats(1e5, 1e9))
def test_tail_weight_is_decreasing(a, b):
    kt = mhz(10)
    lo, hi = sorted((a, b))
    assert sech_tail_weight(hi, kt) <= sech_tail_weight(lo, kt) <= 1.0


def test_central_group_velocity_matches_central_mode():
    w = mode_frequency(L30, L30.central_mode)
    assert central_group_velocity(L30) == dispersion_at(L30, w).group_velocity
