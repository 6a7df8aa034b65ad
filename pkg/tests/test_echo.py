import math

import numpy as np
import pytest

import squintsense as sq
from squintsense.scene import SPEED_OF_LIGHT

from conftest import FIG5_PEAK_BINS, make_scene


def _random_small_scene(rng):
    f0 = rng.uniform(100e9, 300e9)
    w = rng.uniform(1e9, 20e9)
    m = int(rng.integers(8, 64))
    n = int(rng.integers(2, 32))
    band = sq.BandPlan(f0, w, m)
    array = sq.ArrayConfig.half_wavelength(n, f0, carrier_ref=band.carrier)
    a, b = np.radians(rng.uniform(-70, 70, 2))
    if math.sin(a) == math.sin(b):
        b += 0.1
    sweep = sq.SweepPlan(a, b)
    k = int(rng.integers(1, 5))
    targets = [sq.Target.with_default_gain(
        float(rng.uniform(5, 300)), float(np.radians(rng.uniform(-65, 65))),
        array.carrier_ref) for _ in range(k)]
    return targets, sq.design(sweep, band, array)


def test_matrix_form_matches_closed_form_small():
    rng = np.random.default_rng(11)
    for _ in range(5):
        targets, design = _random_small_scene(rng)
        y1 = sq.echo_closed_form(targets, design).values
        y2 = sq.echo_matrix_form(targets, design).values
        assert np.linalg.norm(y1 - y2) <= 1e-9 * np.linalg.norm(y2)


def test_single_antenna_echo_is_plain_sum():
    band = sq.BandPlan(220e9, 2e9, 16)
    array = sq.ArrayConfig(1, 1e-4, band.carrier)
    targets = [sq.Target.with_default_gain(r, math.radians(a), band.carrier)
               for r, a in [(40.0, 10.0), (90.0, -25.0)]]
    d = sq.design(sq.SweepPlan(0.5, -0.5), band, array)
    y = sq.echo_closed_form(targets, d).values
    f = band.frequencies()
    expect = sum(t.gain * np.exp(-1j * 4 * np.pi * f * t.range_m / SPEED_OF_LIGHT)
                 for t in targets)
    np.testing.assert_allclose(y, expect, rtol=1e-12)


def test_empty_and_zero_gain_scenes(fig5):
    d = fig5["design"]
    assert not np.any(sq.echo_closed_form([], d).values)
    dead = [sq.Target(50.0, 0.1, 0.0 + 0.0j)]
    assert not np.any(sq.echo_closed_form(dead, d).values)


def test_aligned_target_peak_sample(fig5):
    d = fig5["design"]
    m = 700
    theta = sq.squint_angle(d, m)
    t = sq.Target.with_default_gain(90.0, theta, fig5["array"].carrier_ref)
    y = sq.echo_closed_form([t], d).values
    f = float(fig5["band"].frequencies()[m])
    n = fig5["array"].n_antennas
    expect = t.gain * n * np.exp(-1j * 4 * np.pi * f * t.range_m / SPEED_OF_LIGHT)
    assert y[m] == pytest.approx(expect, rel=1e-9)


@pytest.mark.parametrize("n", [64, 128, 256])
def test_peak_amplitude_law(n):
    band, array, sweep, _ = make_scene(n_antennas=n, targets=[])
    d = sq.design(sweep, band, array)
    m = 1024
    theta = sq.squint_angle(d, m)
    t = sq.Target.with_default_gain(120.0, theta, array.carrier_ref)
    g = np.abs(sq.echo_closed_form([t], d).values)
    assert g[m] == pytest.approx(abs(t.gain) * n, rel=1e-3)
    assert int(np.argmax(g)) == m


def test_peak_phase_law(fig5):
    d = fig5["design"]
    m = 1500
    theta = sq.squint_angle(d, m)
    t = sq.Target.with_default_gain(140.0, theta, fig5["array"].carrier_ref)
    y = sq.echo_closed_form([t], d).values
    f = float(fig5["band"].frequencies()[m])
    expected = -4 * np.pi * f * t.range_m / SPEED_OF_LIGHT
    diff = np.angle(y[m] * np.exp(-1j * expected))
    assert abs(diff) < 1e-3


def test_fig5_spectrum_has_four_dominant_peaks(fig5):
    g = fig5["spectrum"].power()
    interior = np.where((g[1:-1] > g[:-2]) & (g[1:-1] > g[2:]))[0] + 1
    top4 = interior[np.argsort(g[interior])[::-1][:4]]
    assert sorted(int(i) for i in top4) == FIG5_PEAK_BINS


def test_interference_decay_between_separated_targets(fig5):
    # two equal-gain targets more than 4 beamwidths apart in sin(theta)
    d = fig5["design"]
    n = fig5["array"].n_antennas
    m1, m2 = 400, 1600
    th1, th2 = sq.squint_angle(d, m1), sq.squint_angle(d, m2)
    t1 = sq.Target(60.0, th1, 1.0 + 0j)
    t2 = sq.Target(60.0, th2, 1.0 + 0j)
    beamwidth_sin = 2.0 / n
    assert abs(math.sin(th1) - math.sin(th2)) > 4 * beamwidth_sin
    alone = sq.echo_closed_form([t1], d).values[m1]
    both = sq.echo_closed_form([t1, t2], d).values[m1]
    rel = abs(both - alone) / abs(alone)
    f1 = float(fig5["band"].frequencies()[m1])
    beta = float(sq.squint_beta(d, f1, th2))
    envelope = 1.0 / math.sin(abs(beta) / 2.0) ** 2  # squared-kernel sidelobe cap
    assert rel < envelope / n ** 2


def test_add_noise_deterministic(fig5):
    noise = sq.NoiseModel(snr_db=10.0, seed=42)
    y1 = sq.add_noise(fig5["spectrum"], noise).values
    y2 = sq.add_noise(fig5["spectrum"], noise).values
    np.testing.assert_array_equal(y1, y2)
    y3 = sq.add_noise(fig5["spectrum"], sq.NoiseModel(snr_db=10.0, seed=43)).values
    assert np.any(y1 != y3)


def test_add_noise_disabled_keeps_values(fig5):
    out = sq.add_noise(fig5["spectrum"], sq.NoiseModel(snr_db=None))
    np.testing.assert_array_equal(out.values, fig5["spectrum"].values)
    assert out.values is not fig5["spectrum"].values


def test_add_noise_snr_scaling(fig5):
    for ref, credit in (("element", fig5["array"].n_antennas), ("beamformed", 1.0)):
        noisy = sq.add_noise(fig5["spectrum"],
                             sq.NoiseModel(snr_db=20.0, sigma2=2.0, seed=0,
                                           reference=ref))
        clean_peak = np.max(np.abs(fig5["spectrum"].values))
        scale = math.sqrt(100.0 * 2.0 * credit) / clean_peak
        expect = scale * fig5["spectrum"].values
        resid = noisy.values - expect
        # residual is exactly the drawn noise: zero-mean, variance sigma2
        assert abs(np.mean(np.abs(resid) ** 2) - 2.0) < 0.2


def test_noise_variance_law_of_large_numbers():
    band = sq.BandPlan(220e9, 1e9, 100000 - 1)
    array = sq.ArrayConfig(1, 1e-4, band.carrier)
    d = sq.design(sq.SweepPlan(0.0, 0.1), band, array)
    silent = sq.EchoSpectrum(np.zeros(band.n_subcarriers, complex), d)
    noisy = sq.add_noise(silent, sq.NoiseModel(snr_db=0.0, sigma2=1.5, seed=3))
    var = np.mean(np.abs(noisy.values) ** 2)
    assert var == pytest.approx(1.5, rel=0.02)


def test_noise_reference_validation():
    with pytest.raises(ValueError):
        sq.NoiseModel(snr_db=0.0, reference="antenna")
    with pytest.raises(ValueError):
        sq.NoiseModel(snr_db=0.0, sigma2=0.0)
