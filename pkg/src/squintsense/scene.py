"""Scene geometry: antenna array, OFDM band plan, targets and sweep plans.

Angles are radians everywhere inside the library, distances are meters and
frequencies are Hz.  Config files speak degrees and are converted at the
boundary (see :mod:`squintsense.config`).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError

# Radar convention for c.  This keeps the round numbers of the usual OFDM
# ranging identities exact, e.g. R_u = c*M/(2W) = 153.6 m for W = 4 GHz,
# M = 4096.
SPEED_OF_LIGHT = 3.0e8


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear array on the y-axis, element n sitting at (0, n*d).

    ``carrier_ref`` is the frequency whose wavelength enters the default
    path-gain model of :func:`default_gain`.
    """

    n_antennas: int
    spacing: float
    carrier_ref: float

    def __post_init__(self):
        if self.n_antennas < 1:
            raise ConfigError("n_antennas must be >= 1")
        if self.spacing <= 0.0:
            raise ConfigError("antenna spacing must be positive")
        if self.carrier_ref <= 0.0:
            raise ConfigError("carrier_ref must be positive")

    def indices(self) -> np.ndarray:
        """Element indices -(N-1)/2 ... (N-1)/2; half-integers for even N."""
        n = self.n_antennas
        return np.arange(n) - (n - 1) / 2.0

    @property
    def aperture(self) -> float:
        return (self.n_antennas - 1) * self.spacing

    @classmethod
    def half_wavelength(cls, n_antennas: int, frequency: float,
                        carrier_ref: float | None = None) -> "ArrayConfig":
        """Array with d = lambda/2 evaluated at ``frequency``."""
        d = SPEED_OF_LIGHT / (2.0 * frequency)
        return cls(n_antennas, d, frequency if carrier_ref is None else carrier_ref)


@dataclass(frozen=True)
class BandPlan:
    """OFDM band with M+1 subcarriers f_m = f0 + m*W/M, m = 0..M."""

    f0: float
    bandwidth: float
    n_subcarriers_minus_one: int

    def __post_init__(self):
        if self.f0 <= 0.0:
            raise ConfigError("f0 must be positive")
        if self.bandwidth <= 0.0:
            raise ConfigError("bandwidth must be positive")
        if self.n_subcarriers_minus_one < 1:
            raise ConfigError("need at least two subcarriers (M >= 1)")

    @property
    def m(self) -> int:
        return self.n_subcarriers_minus_one

    @property
    def n_subcarriers(self) -> int:
        return self.n_subcarriers_minus_one + 1

    @property
    def subcarrier_spacing(self) -> float:
        return self.bandwidth / self.n_subcarriers_minus_one

    @property
    def f_max(self) -> float:
        return self.f0 + self.bandwidth

    @property
    def carrier(self) -> float:
        """Center frequency f_c = f0 + W/2."""
        return self.f0 + 0.5 * self.bandwidth

    def baseband_frequencies(self) -> np.ndarray:
        # (m*W)/M rather than m*(W/M): the last element is then exactly W.
        m = self.n_subcarriers_minus_one
        return (np.arange(m + 1) * self.bandwidth) / m

    def frequencies(self) -> np.ndarray:
        return self.f0 + self.baseband_frequencies()

    def with_subcarrier_count(self, n_subcarriers_minus_one: int) -> "BandPlan":
        """Same band, different subcarrier count (used by ambiguity groups)."""
        return replace(self, n_subcarriers_minus_one=n_subcarriers_minus_one)


def subcarrier_frequencies(plan: BandPlan) -> np.ndarray:
    """Subcarrier frequencies f_m = f0 + m*W/M; first f0, last exactly f0+W."""
    return plan.frequencies()


def default_gain(range_m: float, carrier_ref: float) -> float:
    """Two-way free-space path gain lambda/(8*pi*r)."""
    if range_m <= 0.0:
        raise ConfigError("target range must be positive")
    if carrier_ref <= 0.0:
        raise ConfigError("carrier_ref must be positive")
    lam = SPEED_OF_LIGHT / carrier_ref
    return lam / (8.0 * math.pi * range_m)


@dataclass(frozen=True)
class Target:
    """Point scatterer at polar position (r, theta) with complex gain."""

    range_m: float
    angle_rad: float
    gain: complex

    def __post_init__(self):
        if self.range_m <= 0.0:
            raise ConfigError("target range must be positive")
        if not -math.pi / 2 < self.angle_rad < math.pi / 2:
            raise ConfigError("target angle must lie in (-pi/2, pi/2)")

    @classmethod
    def with_default_gain(cls, range_m: float, angle_rad: float,
                          carrier_ref: float) -> "Target":
        return cls(range_m, angle_rad, complex(default_gain(range_m, carrier_ref)))

    @property
    def position(self) -> tuple[float, float]:
        """Cartesian (x, y) with the array along the y-axis."""
        return (self.range_m * math.cos(self.angle_rad),
                self.range_m * math.sin(self.angle_rad))


@dataclass(frozen=True)
class SweepPlan:
    """Squint range of one beam sweep: subcarrier 0 points to theta_start,
    subcarrier M to theta_end."""

    theta_start: float
    theta_end: float

    def __post_init__(self):
        for a in (self.theta_start, self.theta_end):
            if not -math.pi / 2 < a < math.pi / 2:
                raise ConfigError("sweep angles must lie in (-pi/2, pi/2)")

    @property
    def sin_start(self) -> float:
        return math.sin(self.theta_start)

    @property
    def sin_end(self) -> float:
        return math.sin(self.theta_end)

    def interval(self) -> tuple[float, float]:
        return (min(self.theta_start, self.theta_end),
                max(self.theta_start, self.theta_end))


@dataclass(frozen=True)
class MyoloPlan:
    """An ordered set of sweep plans used by the multi-sweep estimator."""

    sweeps: tuple[SweepPlan, ...]

    def __post_init__(self):
        if len(self.sweeps) < 1:
            raise ConfigError("a multi-sweep plan needs at least one sweep")

    @property
    def count(self) -> int:
        return len(self.sweeps)

    def covers(self, sensing: SweepPlan) -> bool:
        """True when every sweep's squint interval contains the sensing interval."""
        lo, hi = sensing.interval()
        return all(s.interval()[0] <= lo and s.interval()[1] >= hi
                   for s in self.sweeps)

    @classmethod
    def widened(cls, base: SweepPlan, count: int, step: float) -> "MyoloPlan":
        """Sweeps that widen ``base`` by p*step on both ends, p = 0..count-1."""
        u = 1.0 if base.theta_start >= base.theta_end else -1.0
        sweeps = tuple(
            SweepPlan(base.theta_start + p * step * u, base.theta_end - p * step * u)
            for p in range(count))
        return cls(sweeps)


@dataclass(frozen=True)
class AmbiguityPlan:
    """Subcarrier-count groups used to extend the unambiguous range.

    All groups share the bandwidth; the per-group counts must differ so the
    per-group unambiguous distances c*M_q/(2W) are incommensurate enough for
    their lattices to intersect only at the true range below
    ``r_sense_max``.
    """

    groups: tuple[BandPlan, ...]
    r_sense_max: float

    def __post_init__(self):
        if len(self.groups) < 1:
            raise ConfigError("need at least one group")
        if self.r_sense_max <= 0.0:
            raise ConfigError("r_sense_max must be positive")
        w = self.groups[0].bandwidth
        if any(g.bandwidth != w for g in self.groups):
            raise ConfigError("all ambiguity groups must share one bandwidth")
        counts = [g.n_subcarriers_minus_one for g in self.groups]
        if len(set(counts)) != len(counts):
            raise ConfigError("group subcarrier counts must be distinct")
        combined = SPEED_OF_LIGHT / (2.0 * w) * math.lcm(*counts)
        if combined <= self.r_sense_max:
            raise ConfigError(
                f"combined unambiguous distance {combined:.1f} m does not cover "
                f"r_sense_max {self.r_sense_max:.1f} m")

    @property
    def primary(self) -> BandPlan:
        return self.groups[0]

    @classmethod
    def from_counts(cls, band: BandPlan, counts, r_sense_max: float) -> "AmbiguityPlan":
        groups = tuple(band.with_subcarrier_count(int(c)) for c in counts)
        return cls(groups, r_sense_max)


def validate_geometry(array: ArrayConfig, plan: BandPlan) -> None:
    """Spacing sanity against the band.

    Spacing above lambda/2 at the lowest subcarrier is rejected; spacing
    between lambda/2 at f0 and lambda/2 at f0+W (the usual d = lambda0/2
    setting) only warns, since grating lobes then appear solely at extreme
    angles outside the usual sweep ranges.
    """
    d_f0 = SPEED_OF_LIGHT / (2.0 * plan.f0)
    if array.spacing > d_f0 * (1.0 + 1e-9):
        raise ConfigError(
            f"antenna spacing {array.spacing:.3e} m exceeds half wavelength "
            f"{d_f0:.3e} m at the lowest subcarrier")
    d_top = SPEED_OF_LIGHT / (2.0 * plan.f_max)
    if array.spacing > d_top * (1.0 + 1e-9):
        warnings.warn(
            "antenna spacing exceeds half wavelength at the top of the band; "
            "grating lobes are possible at extreme angles", stacklevel=2)
