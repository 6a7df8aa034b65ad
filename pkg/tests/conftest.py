"""Shared scene fixtures.

The four-target demo scene (N=128, M=2048, sweep 60 -> -60 deg) appears in
many tests: at W = 1 GHz the detected peak subcarriers reproduce the
published angle estimates, and at W = 10 GHz with the (2048, 2515) group
pair the resolved ranges are exact to a centimeter.
"""
import math

import numpy as np
import pytest

import squintsense as sq
from squintsense.harness import SensingConfig

FIG5_TARGETS = [(50.0, 50.0), (120.0, 30.0), (200.0, -10.0), (80.0, -45.0)]
FIG5_ANGLES_DEG = [49.9784, 30.0139, -9.9954, -44.9784]
FIG5_PEAK_BINS = [118, 431, 1227, 1859]


def make_scene(f0=220e9, bandwidth=1e9, m=2048, n_antennas=128,
               start_deg=60.0, end_deg=-60.0, targets=FIG5_TARGETS):
    band = sq.BandPlan(f0, bandwidth, m)
    array = sq.ArrayConfig.half_wavelength(n_antennas, f0,
                                           carrier_ref=band.carrier)
    sweep = sq.SweepPlan(math.radians(start_deg), math.radians(end_deg))
    tgts = tuple(sq.Target.with_default_gain(r, math.radians(a), array.carrier_ref)
                 for r, a in targets)
    return band, array, sweep, tgts


@pytest.fixture(scope="session")
def fig5():
    """Demo scene at W = 1 GHz (reproduces the published angle estimates)."""
    band, array, sweep, targets = make_scene()
    design = sq.design(sweep, band, array)
    spectrum = sq.echo_closed_form(targets, design)
    return {"band": band, "array": array, "sweep": sweep,
            "targets": targets, "design": design, "spectrum": spectrum}


@pytest.fixture(scope="session")
def fig5_wide():
    """Same geometry at W = 10 GHz with the (2048, 2515) ambiguity pair."""
    band, array, sweep, targets = make_scene(bandwidth=10e9)
    amb = sq.AmbiguityPlan.from_counts(band, [2048, 2515], 300.0)
    return {"band": band, "array": array, "sweep": sweep,
            "targets": targets, "ambiguity": amb,
            "sensing": SensingConfig(expected_targets=4)}


@pytest.fixture(scope="session")
def fig7(fig5):
    """Sixteen widened sweeps over the demo scene (multi-sweep estimator)."""
    band, array = fig5["band"], fig5["array"]
    plan = sq.MyoloPlan.widened(fig5["sweep"], 16, math.radians(1.0))
    spectra = [sq.echo_closed_form(fig5["targets"], sq.design(s, band, array))
               for s in plan.sweeps]
    return {"plan": plan, "spectra": spectra, "band": band, "array": array}
