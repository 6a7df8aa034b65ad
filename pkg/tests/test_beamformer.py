import math

import numpy as np
import pytest

import squintsense as sq
from squintsense import DesignError
from squintsense.beamformer import dirichlet_kernel
from squintsense.scene import SPEED_OF_LIGHT

from conftest import make_scene


def test_design_zero_sweep_gives_zero_settings():
    band, array, _, _ = make_scene()
    d = sq.design(sq.SweepPlan(0.0, 0.0), band, array)
    np.testing.assert_array_equal(d.ps_phases, 0.0)
    np.testing.assert_array_equal(d.ttd_delays, 0.0)


def test_weight_at_first_subcarrier_matches_steering(fig5):
    d = fig5["design"]
    n = fig5["array"].n_antennas
    w = sq.weights(d, 0)
    a = sq.steering(fig5["band"].f0, fig5["sweep"].theta_start, fig5["array"])
    np.testing.assert_allclose(w, a / math.sqrt(n), rtol=1e-12)


def test_squint_map_endpoints(fig5):
    d = fig5["design"]
    m = fig5["band"].n_subcarriers_minus_one
    assert abs(sq.squint_angle(d, 0) - fig5["sweep"].theta_start) < 1e-12
    assert abs(sq.squint_angle(d, m) - fig5["sweep"].theta_end) < 1e-12


def test_squint_angle_midband_value():
    # independent evaluation in GHz units of the map at m = M/2
    band, array, sweep, _ = make_scene(bandwidth=22e9, m=32)
    d = sq.design(sweep, band, array)
    s60 = math.sin(math.radians(60.0))
    sin_expect = (0.5 * 220 * s60 + 242 * 0.5 * (-s60)) / 231.0
    got = sq.squint_angle(d, 16)
    assert math.sin(got) == pytest.approx(sin_expect, abs=1e-12)
    assert math.degrees(got) == pytest.approx(-2.364, abs=1e-3)


def test_fig3b_sweep_covers_both_ends():
    band, array, sweep, _ = make_scene(bandwidth=22e9, m=32)
    d = sq.design(sweep, band, array)
    angles = sq.squint_map(d)
    assert math.degrees(angles[0]) == pytest.approx(60.0, abs=1e-9)
    assert math.degrees(angles[-1]) == pytest.approx(-60.0, abs=1e-9)
    assert np.all(np.diff(np.sin(angles)) < 0)


def test_squint_map_monotone_random_plans():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        f0 = rng.uniform(100e9, 300e9)
        w = rng.uniform(0.5e9, 30e9)
        m = int(rng.integers(16, 512))
        while True:
            a, b = np.radians(rng.uniform(-85, 85, 2))
            if abs(math.sin(a) - math.sin(b)) > 1e-3:
                break
        band = sq.BandPlan(f0, w, m)
        array = sq.ArrayConfig.half_wavelength(16, f0)
        d = sq.design(sq.SweepPlan(a, b), band, array)
        sines = np.sin(sq.squint_map(d))
        diffs = np.diff(sines)
        assert np.all(diffs < 0) if math.sin(b) < math.sin(a) else np.all(diffs > 0)


def test_beta_vanishes_on_the_map(fig5):
    d = fig5["design"]
    f = fig5["band"].frequencies()
    angles = sq.squint_map(d)
    beta = sq.squint_beta(d, f, angles)
    assert np.max(np.abs(beta)) < 1e-10


def test_gain_peak_value(fig5):
    d = fig5["design"]
    m = 777
    theta = sq.squint_angle(d, m)
    n = fig5["array"].n_antennas
    assert sq.array_gain(d, m, theta) == pytest.approx(math.sqrt(n), rel=1e-9)
    assert sq.array_gain(d, m, theta) == pytest.approx(11.3137085, rel=1e-6)


def test_gain_first_null(fig5):
    d = fig5["design"]
    m = 500
    n = fig5["array"].n_antennas
    f = float(fig5["band"].frequencies()[m])
    # move sin(theta) to the first null of the array factor, beta = 2*pi/N
    dsin = SPEED_OF_LIGHT / (n * fig5["array"].spacing * f)
    theta = math.asin(math.sin(sq.squint_angle(d, m)) + dsin)
    assert sq.array_gain(d, m, theta) < 1e-7


def test_gain_matches_explicit_inner_product(fig5):
    d = fig5["design"]
    rng = np.random.default_rng(7)
    for _ in range(20):
        m = int(rng.integers(0, fig5["band"].n_subcarriers))
        theta = float(rng.uniform(-1.2, 1.2))
        w = sq.weights(d, m)
        a = sq.steering(float(fig5["band"].frequencies()[m]), theta, fig5["array"])
        explicit = abs(np.vdot(w, a))
        assert sq.array_gain(d, m, theta) == pytest.approx(explicit, rel=1e-9)


def test_dirichlet_kernel_singularities():
    assert dirichlet_kernel(0.0, 8) == pytest.approx(8.0)
    assert dirichlet_kernel(2 * math.pi, 8) == pytest.approx(8.0, rel=1e-9)
    assert dirichlet_kernel(2 * math.pi, 9) == pytest.approx(9.0, rel=1e-9)
    # odd N flips sign on odd multiples of 2*pi? direct sum oracle:
    n, beta = 7, 0.37
    direct = np.sum(np.exp(-1j * (np.arange(n) - (n - 1) / 2) * beta))
    assert dirichlet_kernel(beta, n) == pytest.approx(direct.real, rel=1e-12)
    assert abs(direct.imag) < 1e-12


def test_physical_delays_offset_only_changes_common_phase(fig5):
    d = fig5["design"]
    t_phys = sq.physical_delays(d)
    assert np.all(t_phys >= 0.0)
    # a common delay leaves every per-subcarrier gain untouched
    m = 321
    fb = float(fig5["band"].baseband_frequencies()[m])
    w = sq.weights(d, m)
    offset = t_phys - d.ttd_delays
    w_phys = w * np.exp(-2j * np.pi * fb * offset)
    a = sq.steering(float(fig5["band"].frequencies()[m]),
                    math.radians(10.0), fig5["array"])
    assert abs(np.vdot(w_phys, a)) == pytest.approx(abs(np.vdot(w, a)), rel=1e-12)


def test_ps_phases_kept_unreduced(fig5):
    d = fig5["design"]
    # the closed form grows linearly with element index; values far beyond
    # one turn must survive (reduction happens only on export)
    assert np.max(np.abs(d.ps_phases)) > 10.0


def test_squint_angle_out_of_band_extrapolation_errors(fig5):
    d = fig5["design"]
    with pytest.raises(DesignError):
        sq.squint_angle_at(d, fig5["band"].f0 * 0.5)


def test_squint_angle_index_bounds(fig5):
    with pytest.raises(ValueError):
        sq.squint_angle(fig5["design"], -1)
    with pytest.raises(ValueError):
        sq.squint_angle(fig5["design"], 99999)
