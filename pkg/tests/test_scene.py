import math

import numpy as np
import pytest

import squintsense as sq
from squintsense import ConfigError
from squintsense.scene import SPEED_OF_LIGHT


def test_subcarrier_frequencies_small():
    plan = sq.BandPlan(220e9, 22e9, 2)
    np.testing.assert_allclose(sq.subcarrier_frequencies(plan),
                               [220e9, 231e9, 242e9], rtol=1e-15)


def test_subcarrier_frequencies_endpoints_exact():
    plan = sq.BandPlan(220e9, 10e9, 2048)
    f = sq.subcarrier_frequencies(plan)
    assert f[0] == 220e9
    assert f[-1] == 220e9 + 10e9
    assert len(f) == 2049


def test_subcarrier_frequencies_two_points():
    plan = sq.BandPlan(1e9, 5e8, 1)
    f = sq.subcarrier_frequencies(plan)
    assert f[0] == 1e9 and f[-1] == 1.5e9 and len(f) == 2


def test_subcarrier_spacing_uniform():
    plan = sq.BandPlan(220e9, 10e9, 2515)  # W/M not a dyadic rational
    f = sq.subcarrier_frequencies(plan)
    assert np.all(np.diff(f) > 0)
    np.testing.assert_allclose(np.diff(f), plan.subcarrier_spacing, rtol=1e-9)


def test_band_plan_validation():
    with pytest.raises(ConfigError):
        sq.BandPlan(-1.0, 1e9, 16)
    with pytest.raises(ConfigError):
        sq.BandPlan(1e9, 0.0, 16)
    with pytest.raises(ConfigError):
        sq.BandPlan(1e9, 1e8, 0)


def test_default_gain_identity():
    lam = SPEED_OF_LIGHT / 220e9
    r = lam / (8.0 * math.pi)
    assert sq.default_gain(r, 220e9) == pytest.approx(1.0, rel=1e-12)


def test_default_gain_hand_value():
    # lambda = 1.3636e-3 m at 220 GHz, gain = lambda/(8*pi*50)
    assert sq.default_gain(50.0, 220e9) == pytest.approx(1.0853e-6, rel=1e-3)


def test_default_gain_inverse_range():
    g1 = sq.default_gain(40.0, 220e9)
    g2 = sq.default_gain(80.0, 220e9)
    assert g1 == pytest.approx(2.0 * g2, rel=1e-12)


def test_default_gain_rejects_bad_range():
    with pytest.raises(ConfigError):
        sq.default_gain(0.0, 220e9)
    with pytest.raises(ConfigError):
        sq.default_gain(-3.0, 220e9)


@pytest.mark.parametrize("n", [1, 2, 3, 64, 127, 128])
def test_antenna_indices(n):
    arr = sq.ArrayConfig(n, 1e-3, 220e9)
    idx = arr.indices()
    assert len(idx) == n
    assert idx.sum() == 0.0
    np.testing.assert_allclose(np.diff(idx), 1.0)
    if n % 2 == 1:
        assert np.all(idx == np.round(idx))  # integers for odd N
    else:
        assert np.all(np.abs(idx - np.round(idx)) == 0.5)  # half-integers


def test_array_validation():
    with pytest.raises(ConfigError):
        sq.ArrayConfig(0, 1e-3, 220e9)
    with pytest.raises(ConfigError):
        sq.ArrayConfig(4, -1.0, 220e9)


def test_half_wavelength_spacing():
    arr = sq.ArrayConfig.half_wavelength(8, 220e9)
    assert arr.spacing == pytest.approx(SPEED_OF_LIGHT / (2 * 220e9), rel=1e-15)


def test_target_validation():
    with pytest.raises(ConfigError):
        sq.Target(-1.0, 0.0, 1.0 + 0j)
    with pytest.raises(ConfigError):
        sq.Target(10.0, math.pi, 1.0 + 0j)
    t = sq.Target.with_default_gain(50.0, math.radians(30.0), 220e9)
    assert t.gain.imag == 0.0 and t.gain.real > 0.0
    x, y = t.position
    assert x == pytest.approx(50.0 * math.cos(math.radians(30.0)))
    assert y == pytest.approx(25.0)


def test_sweep_plan_bounds():
    with pytest.raises(ConfigError):
        sq.SweepPlan(math.pi / 2, 0.0)
    # equal angles are allowed (degenerate, non-sweeping design)
    sq.SweepPlan(0.0, 0.0)


def test_myolo_plan_cover_and_widen():
    base = sq.SweepPlan(math.radians(60), math.radians(-60))
    plan = sq.MyoloPlan.widened(base, 4, math.radians(1.0))
    assert plan.count == 4
    assert plan.covers(base)
    assert plan.sweeps[3].theta_start == pytest.approx(math.radians(63))
    assert plan.sweeps[3].theta_end == pytest.approx(math.radians(-63))
    narrow = sq.MyoloPlan((sq.SweepPlan(math.radians(50), math.radians(-60)),))
    assert not narrow.covers(base)


def test_ambiguity_plan_validation():
    band = sq.BandPlan(220e9, 10e9, 2048)
    plan = sq.AmbiguityPlan.from_counts(band, [2048, 2515], 400.0)
    assert plan.primary.n_subcarriers_minus_one == 2048
    with pytest.raises(ConfigError):
        sq.AmbiguityPlan.from_counts(band, [2048, 2048], 400.0)
    other = sq.BandPlan(220e9, 4e9, 4096)
    with pytest.raises(ConfigError):
        sq.AmbiguityPlan((band, other), 100.0)
    # single group cannot cover more than its own unambiguous distance
    with pytest.raises(ConfigError):
        sq.AmbiguityPlan((band,), 100.0)


def test_validate_geometry():
    band = sq.BandPlan(220e9, 22e9, 64)
    # d = lambda/2 at f0: legal but warns about the top of the band
    arr = sq.ArrayConfig.half_wavelength(8, band.f0)
    with pytest.warns(UserWarning):
        sq.validate_geometry(arr, band)
    # d = lambda/2 at f0+W: silent
    tight = sq.ArrayConfig.half_wavelength(8, band.f_max)
    sq.validate_geometry(tight, band)
    # above lambda/2 at f0: rejected
    wide = sq.ArrayConfig(8, 1.01 * SPEED_OF_LIGHT / (2 * band.f0), 220e9)
    with pytest.raises(ConfigError):
        sq.validate_geometry(wide, band)
