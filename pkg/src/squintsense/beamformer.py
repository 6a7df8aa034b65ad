"""Phase-shifter / true-time-delay design for controllable beam squint.

One phase shifter and one TTD per element give the weight
w_n = exp(-j*2*pi*(phi_n + fb*t_n)) / sqrt(N) with fb the baseband
frequency.  Choosing

    phi_n = -f0 * n * d * sin(theta_start) / c
    t_n   = -phi_n / W - (f0 + W) * n * d * sin(theta_end) / (W * c)

points subcarrier 0 at theta_start and subcarrier M at theta_end, with the
intermediate subcarriers gliding between the two along a closed-form map of
sin(theta) over frequency.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DesignError
from .scene import SPEED_OF_LIGHT, ArrayConfig, BandPlan, SweepPlan

# Clamp guard when inverting the squint map through arcsin.
_SIN_TOL = 1e-12


def dirichlet_kernel(beta, n_antennas: int):
    """sin(N*beta/2)/sin(beta/2), the symmetric array factor.

    Removable singularities at multiples of 2*pi evaluate to +-N.
    """
    beta = np.asarray(beta, dtype=float)
    half = 0.5 * beta
    den = np.sin(half)
    singular = np.abs(den) < 1e-12
    safe = np.where(singular, 1.0, den)
    regular = np.sin(n_antennas * half) / safe
    limit = n_antennas * np.cos(n_antennas * half) / np.cos(half)
    out = np.where(singular, limit, regular)
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class SquintDesign:
    """Per-element PS phases (cycles) and TTD delays (seconds) for a sweep."""

    ps_phases: np.ndarray
    ttd_delays: np.ndarray
    plan: BandPlan
    array: ArrayConfig
    sweep: SweepPlan


def design(sweep: SweepPlan, plan: BandPlan, array: ArrayConfig) -> SquintDesign:
    """Closed-form PS/TTD settings realizing the requested squint range."""
    n = array.indices()
    d = array.spacing
    f0, w = plan.f0, plan.bandwidth
    phases = -f0 * n * d * sweep.sin_start / SPEED_OF_LIGHT
    delays = -phases / w - (f0 + w) * n * d * sweep.sin_end / (w * SPEED_OF_LIGHT)
    return SquintDesign(phases, delays, plan, array, sweep)


def weights(design: SquintDesign, m: int) -> np.ndarray:
    """Beamforming vector on subcarrier m, unit norm."""
    fb = float(design.plan.baseband_frequencies()[m])
    n = design.array.n_antennas
    return np.exp(-2j * np.pi * (design.ps_phases + fb * design.ttd_delays)) / math.sqrt(n)


def physical_delays(design: SquintDesign) -> np.ndarray:
    """TTD values shifted by a common offset so all are non-negative.

    A common delay is only a global per-subcarrier phase; powers and phase
    differences are unchanged.
    """
    t = design.ttd_delays
    return t + max(0.0, -float(t.min()))


def squint_sine(design: SquintDesign, frequency) -> np.ndarray:
    """sin of the beam direction at any in-band frequency (the squint map)."""
    f = np.asarray(frequency, dtype=float)
    f0, w = design.plan.f0, design.plan.bandwidth
    fb = f - f0
    ss, se = design.sweep.sin_start, design.sweep.sin_end
    return ((w - fb) * f0 * ss + (w + f0) * fb * se) / (w * f)


def _arcsin_checked(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    excess = np.max(np.abs(s)) - 1.0
    if excess > _SIN_TOL:
        raise DesignError(f"squint map leaves [-1, 1] by {excess:.3e}")
    return np.arcsin(np.clip(s, -1.0, 1.0))


def squint_angle_at(design: SquintDesign, frequency) -> np.ndarray | float:
    """Beam direction (radians) at an arbitrary in-band frequency."""
    out = _arcsin_checked(squint_sine(design, frequency))
    return out if out.ndim else float(out)


def squint_angle(design: SquintDesign, m: int) -> float:
    """Beam direction of subcarrier m."""
    if not 0 <= m <= design.plan.n_subcarriers_minus_one:
        raise ValueError(f"subcarrier index {m} out of range")
    return float(squint_angle_at(design, float(design.plan.frequencies()[m])))


def squint_map(design: SquintDesign) -> np.ndarray:
    """Beam directions of all M+1 subcarriers (radians)."""
    return np.asarray(squint_angle_at(design, design.plan.frequencies()))


def squint_beta(design: SquintDesign, frequency, angle):
    """Phase-progression argument of the array factor.

    beta(f, theta) is zero exactly when the beam of subcarrier f points at
    theta; the echo amplitude then carries the full N^2 array factor.
    Broadcasts over both arguments.
    """
    f = np.asarray(frequency, dtype=float)
    f0, w = design.plan.f0, design.plan.bandwidth
    fb = f - f0
    ss, se = design.sweep.sin_start, design.sweep.sin_end
    bracket = ((w - fb) * f0 * ss + (w + f0) * fb * se
               - w * f * np.sin(np.asarray(angle, dtype=float)))
    return 2.0 * np.pi * design.array.spacing / (w * SPEED_OF_LIGHT) * bracket


def array_gain(design: SquintDesign, m: int, angle: float) -> float:
    """|w^H a| on subcarrier m toward ``angle``; peaks at sqrt(N)."""
    f = float(design.plan.frequencies()[m])
    b = squint_beta(design, f, angle)
    n = design.array.n_antennas
    return abs(float(dirichlet_kernel(b, n))) / math.sqrt(n)
