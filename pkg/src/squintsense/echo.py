"""Echo synthesis under a squint design, plus the receive noise model.

Two synthesis routes exist on purpose: the closed form collapses the
beamformed quadratic form into a squared Dirichlet factor per target, while
the matrix form multiplies out w^H H_m (w^H)^T per subcarrier.  They must
agree to numerical precision; the matrix route is the oracle and is kept to
small problem sizes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import channel
from .beamformer import SquintDesign, dirichlet_kernel, squint_beta, weights
from .scene import SPEED_OF_LIGHT


@dataclass(eq=False)
class EchoSpectrum:
    """Complex echo samples y_m, one per subcarrier, under one design."""

    values: np.ndarray
    design: SquintDesign

    @property
    def plan(self):
        return self.design.plan

    @property
    def n_subcarriers(self) -> int:
        return len(self.values)

    def power(self) -> np.ndarray:
        """Power spectrum g_m = |y_m|."""
        return np.abs(self.values)

    def phases(self) -> np.ndarray:
        """Measured phases arg(y_m)."""
        return np.angle(self.values)


@dataclass(frozen=True)
class NoiseModel:
    """Circularly symmetric complex Gaussian receive noise.

    ``snr_db`` of None disables noise entirely.  The echo is rescaled so the
    strongest noiseless sample meets the requested SNR; with the default
    ``reference="element"`` the SNR is quoted per receive element, i.e. the
    beamformed peak sample sits at N * snr above the noise power.  With
    ``reference="beamformed"`` the peak sample itself meets snr.  See the
    README for why the element reference is the default.
    """

    snr_db: float | None = None
    sigma2: float = 1.0
    seed: int | None = None
    reference: str = "element"

    def __post_init__(self):
        if self.sigma2 <= 0.0:
            raise ValueError("noise variance must be positive")
        if self.reference not in ("element", "beamformed"):
            raise ValueError("reference must be 'element' or 'beamformed'")


def echo_closed_form(targets, design: SquintDesign) -> EchoSpectrum:
    """Noiseless echo via the squared-Dirichlet closed form."""
    f = design.plan.frequencies()
    n = design.array.n_antennas
    y = np.zeros(len(f), dtype=complex)
    for t in targets:
        b = squint_beta(design, f, t.angle_rad)
        d2 = dirichlet_kernel(b, n) ** 2
        y += t.gain * np.exp(-1j * 4.0 * np.pi * f * t.range_m / SPEED_OF_LIGHT) * d2 / n
    return EchoSpectrum(y, design)


def echo_matrix_form(targets, design: SquintDesign) -> EchoSpectrum:
    """Noiseless echo via explicit channel matrices (oracle path).

    y_m = w^H H_m (w^H)^T with (w^H)^T = conj(w).  Materializes N x N
    matrices per subcarrier, so keep N and M small.
    """
    plan, array = design.plan, design.array
    y = np.zeros(plan.n_subcarriers, dtype=complex)
    for m in range(plan.n_subcarriers):
        h = channel.echo_channel(targets, plan, array, m)
        wc = weights(design, m).conj()
        y[m] = wc @ h @ wc
    return EchoSpectrum(y, design)


def _rng_from(noise: NoiseModel) -> np.random.Generator:
    # Philox is counter-based, so spawned child streams stay reproducible
    # when trials run in parallel.
    return np.random.Generator(np.random.Philox(noise.seed))


def add_noise(spectrum: EchoSpectrum, noise: NoiseModel,
              rng: np.random.Generator | None = None) -> EchoSpectrum:
    """Scale the echo to the requested SNR and add complex Gaussian noise.

    Deterministic for a fixed ``noise.seed``; pass ``rng`` to draw from an
    externally managed stream instead.
    """
    if noise.snr_db is None:
        return EchoSpectrum(spectrum.values.copy(), spectrum.design)
    if rng is None:
        rng = _rng_from(noise)
    peak = float(np.max(np.abs(spectrum.values))) if len(spectrum.values) else 0.0
    snr = 10.0 ** (noise.snr_db / 10.0)
    gain_credit = spectrum.design.array.n_antennas if noise.reference == "element" else 1.0
    scale = math.sqrt(snr * noise.sigma2 * gain_credit) / peak if peak > 0.0 else 1.0
    size = len(spectrum.values)
    eta = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) \
        * math.sqrt(noise.sigma2 / 2.0)
    return EchoSpectrum(scale * spectrum.values + eta, spectrum.design)
