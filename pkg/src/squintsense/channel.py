"""Per-subcarrier echo channel matrices.

The far-field factorization (rank-1 outer products of steering vectors) is
what the rest of the library consumes.  An exact per-antenna-distance oracle
is kept alongside to quantify the error of the far-field step; it is only
used in tests.
"""
from __future__ import annotations

import math

import numpy as np

from .scene import SPEED_OF_LIGHT, ArrayConfig, BandPlan, Target


def steering(frequency: float, angle: float, array: ArrayConfig) -> np.ndarray:
    """Steering vector with entries exp(j*2*pi*f*n*d*sin(theta)/c)."""
    n = array.indices()
    phase = 2.0 * np.pi * frequency * n * array.spacing * math.sin(angle) / SPEED_OF_LIGHT
    return np.exp(1j * phase)


def echo_channel(targets, plan: BandPlan, array: ArrayConfig, m: int) -> np.ndarray:
    """Monostatic echo channel matrix on subcarrier m.

    H_m = sum_k gain_k * exp(-j*2*pi*f_m*2*r_k/c) * a_k a_k^T, which is
    symmetric and rank-1 per target.
    """
    f = float(plan.frequencies()[m])
    n = array.n_antennas
    h = np.zeros((n, n), dtype=complex)
    for t in targets:
        a = steering(f, t.angle_rad, array)
        phase = np.exp(-1j * 4.0 * np.pi * f * t.range_m / SPEED_OF_LIGHT)
        h += t.gain * phase * np.outer(a, a)
    return h


def _element_distances(target: Target, array: ArrayConfig) -> np.ndarray:
    x, y = target.position
    if x <= 0.0:
        raise ValueError("target must lie in the x > 0 half plane")
    return np.hypot(x, y - array.indices() * array.spacing)


def exact_round_trip_phase(target: Target, array: ArrayConfig, frequency: float,
                           n1: int, n2: int) -> complex:
    """Exact two-way response between elements n1 and n2 (no far-field step).

    Element arguments are offsets into the index list, i.e. 0..N-1.
    """
    r = _element_distances(target, array)
    return target.gain * np.exp(
        -1j * 2.0 * np.pi * frequency * (r[n1] + r[n2]) / SPEED_OF_LIGHT)


def exact_echo_channel(targets, array: ArrayConfig, frequency: float) -> np.ndarray:
    """Exact echo channel matrix built from per-element path lengths."""
    n = array.n_antennas
    h = np.zeros((n, n), dtype=complex)
    for t in targets:
        r = _element_distances(t, array)
        h += t.gain * np.exp(
            -1j * 2.0 * np.pi * frequency * (r[:, None] + r[None, :]) / SPEED_OF_LIGHT)
    return h
