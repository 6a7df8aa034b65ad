"""Angle and range estimation from echo power spectra.

Single-sweep localization ("yolo"): each target lights up the subcarrier
whose squinted beam crosses it; the peak frequency gives the angle through
the inverse squint map, and the phases of the 2*Mdd+1 subcarriers around
the peak give the range through a one-dimensional phase-match search.

Multi-sweep localization ("myolo"): several sweeps with slightly widened
squint ranges each contribute only their peak subcarrier per target; peaks
are associated across sweeps by angle, ranges come from the phase match
over the per-sweep peak frequencies, and angles are averaged.

The range score F(r) = |sum exp(j*(phi_measured - phi_theory(r)))| is
periodic in r with the group's unambiguous distance c*M/(2W); searches run
over one period and resolution across subcarrier groups happens in
:mod:`squintsense.ambiguity`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .beamformer import SquintDesign, dirichlet_kernel, squint_angle_at
from .echo import EchoSpectrum
from .errors import FrequencyDiversityError
from .scene import SPEED_OF_LIGHT, ArrayConfig, BandPlan

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Peak:
    """One detected peak-power subcarrier."""

    index: int
    frequency: float
    power: float
    phase: float


@dataclass(frozen=True)
class PeakSet:
    peaks: tuple[Peak, ...]
    msidelobe: int

    def __len__(self):
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    def __getitem__(self, i):
        return self.peaks[i]


@dataclass(frozen=True)
class RangeGrid:
    """Range-search settings: coarse grid then golden-section refinement.

    The coarse step defaults to c/(2W)/coarse_divisor, a generous
    oversampling of the score's fastest fringe; the best coarse cell is then
    refined to ``refine_tol`` meters.
    """

    coarse_divisor: int = 20
    coarse_step: float | None = None
    refine_tol: float = 1e-4
    r_max: float | None = None

    def step_for(self, plan: BandPlan) -> float:
        if self.coarse_step is not None:
            return self.coarse_step
        return SPEED_OF_LIGHT / (2.0 * plan.bandwidth) / self.coarse_divisor


@dataclass(eq=False)
class RangeSearchResult:
    range_m: float
    score: float
    ranges: np.ndarray | None = None
    scores: np.ndarray | None = None


@dataclass(eq=False)
class Track:
    """Per-sweep peak data of one target across a multi-sweep run."""

    frequencies: np.ndarray
    phases: np.ndarray
    angles: np.ndarray
    powers: np.ndarray
    valid: np.ndarray

    @property
    def count(self) -> int:
        return int(self.valid.sum())


@dataclass(eq=False)
class TrackSet:
    tracks: list[Track]
    plan: BandPlan
    array: ArrayConfig

    def __len__(self):
        return len(self.tracks)

    def __iter__(self):
        return iter(self.tracks)


@dataclass(eq=False)
class LocalizationResult:
    angle_rad: float
    range_m: float
    score: float
    peak: Peak | None = None
    window_clipped: bool = False
    search: RangeSearchResult | None = None
    track: Track | None = None

    @property
    def angle_deg(self) -> float:
        return math.degrees(self.angle_rad)


def detect_peaks(spectrum: EchoSpectrum, msidelobe: int = 20,
                 threshold_factor: float = 5.0,
                 expected: int | None = None) -> PeakSet:
    """Find peak-power subcarriers.

    Strict local maxima of the power spectrum are kept greedily in
    decreasing power with an exclusion radius of 2*msidelobe bins.  Without
    ``expected`` only maxima above threshold_factor * median(power) survive
    (threshold mode); with ``expected`` the strongest ``expected`` maxima
    are returned regardless of the threshold (known-K mode).
    """
    g = spectrum.power()
    if len(g) < 2 * msidelobe + 3:
        raise ValueError("spectrum too short for the sidelobe window")
    interior = np.where((g[1:-1] > g[:-2]) & (g[1:-1] > g[2:]))[0] + 1
    if expected is None:
        interior = interior[g[interior] > threshold_factor * np.median(g)]
    order = interior[np.argsort(g[interior])[::-1]]
    kept: list[int] = []
    limit = expected if expected is not None else len(order)
    for i in order:
        if len(kept) >= limit:
            break
        if all(abs(i - j) > 2 * msidelobe for j in kept):
            kept.append(int(i))
    f = spectrum.plan.frequencies()
    phases = np.angle(spectrum.values)
    peaks = tuple(Peak(i, float(f[i]), float(g[i]), float(phases[i]))
                  for i in sorted(kept))
    return PeakSet(peaks, msidelobe)


def angle_from_peak(f_peak: float, design: SquintDesign) -> float:
    """Invert the squint map at the peak frequency."""
    plan = design.plan
    if not plan.f0 <= f_peak <= plan.f_max:
        raise ValueError("peak frequency outside the band")
    return float(squint_angle_at(design, f_peak))


def _golden_max(fun, lo: float, hi: float, tol: float) -> float:
    """Golden-section maximization on [lo, hi] down to width tol."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def _fft_grid_scores(f_offsets, phasors, spacing: float, step: float,
                     r_max: float):
    """Coarse scores via one sparse FFT, when the grid permits it.

    On the canonical grid (step = R_u / L for integer L, offsets on the
    subcarrier lattice) the score at r_i = i*step is
    |sum_p z_p exp(j*2*pi*i*b_p/L)| with integer bins b_p, i.e. the
    magnitude of an L-point DFT of a sparse sequence.  Returns None when
    the layout does not line up.
    """
    l_real = SPEED_OF_LIGHT / (2.0 * spacing * step)
    l = int(round(l_real))
    if l < 2 or abs(l_real - l) > 1e-6 * l:
        return None
    if not math.isclose(l * step, r_max, rel_tol=1e-9):
        return None
    bins = np.asarray(f_offsets) / spacing
    ibins = np.rint(bins).astype(int)
    if np.max(np.abs(bins - ibins)) > 1e-6:
        return None
    x = np.zeros(l, dtype=complex)
    np.add.at(x, ibins % l, np.conj(phasors))
    return np.abs(np.fft.fft(x))


def _direct_scores(f_offsets, phasors, r_grid) -> np.ndarray:
    """Chunked dense evaluation of |sum_p z_p exp(j*4*pi*f_p*r/c)|."""
    out = np.empty(len(r_grid))
    block = 16384
    k = 4.0 * np.pi / SPEED_OF_LIGHT
    for s in range(0, len(r_grid), block):
        phi = k * np.outer(r_grid[s:s + block], f_offsets)
        out[s:s + block] = np.abs((np.cos(phi) + 1j * np.sin(phi)) @ phasors)
    return out


def _phase_match_search(frequencies: np.ndarray, phases: np.ndarray,
                        r_max: float, step: float, refine_tol: float,
                        keep_curve: bool = True,
                        spacing: float | None = None) -> RangeSearchResult:
    """argmax_r |sum exp(j*(phi + 4*pi*f*r/c))| over [0, r_max).

    A common frequency offset only rotates the sum, so the search uses
    frequencies relative to the first entry for numerical comfort.
    """
    f_off = frequencies - frequencies[0]
    z = np.exp(1j * phases)
    scores = None
    if spacing is not None:
        scores = _fft_grid_scores(f_off, z, spacing, step, r_max)
    if scores is not None:
        r_grid = np.arange(len(scores)) * step
    else:
        r_grid = np.arange(0.0, r_max, step)
        scores = _direct_scores(f_off, z, r_grid)
    i = int(np.argmax(scores))
    lo = r_grid[i - 1] if i > 0 else 0.0
    hi = r_grid[i + 1] if i + 1 < len(r_grid) else r_grid[i] + step
    k = 4.0 * np.pi / SPEED_OF_LIGHT

    def fun(r):
        return abs(np.exp(1j * k * r * f_off) @ z)

    r_hat = _golden_max(fun, lo, hi, refine_tol)
    return RangeSearchResult(
        range_m=float(r_hat), score=float(fun(r_hat)),
        ranges=r_grid if keep_curve else None,
        scores=scores if keep_curve else None)


def yolo_range(spectrum: EchoSpectrum, peak: Peak, msidelobe: int = 20,
               grid: RangeGrid | None = None,
               keep_curve: bool = True) -> tuple[RangeSearchResult, bool]:
    """Range of one target from the sidelobe window around its peak.

    Uses the measured phases of the 2*msidelobe+1 subcarriers centered on
    the peak; the score maximum attainable is 2*msidelobe+1.  Windows
    running over the spectrum edge are clipped (flagged in the second
    return value).
    """
    grid = grid or RangeGrid()
    plan = spectrum.plan
    lo = peak.index - msidelobe
    hi = peak.index + msidelobe
    clipped = lo < 0 or hi > plan.n_subcarriers_minus_one
    lo = max(lo, 0)
    hi = min(hi, plan.n_subcarriers_minus_one)
    window = np.arange(lo, hi + 1)
    f_win = plan.frequencies()[window]
    phi = np.angle(spectrum.values[window])
    r_max = grid.r_max if grid.r_max is not None else \
        SPEED_OF_LIGHT * plan.n_subcarriers_minus_one / (2.0 * plan.bandwidth)
    result = _phase_match_search(f_win, phi, r_max, grid.step_for(plan),
                                 grid.refine_tol, keep_curve,
                                 spacing=plan.subcarrier_spacing)
    return result, clipped


def yolo(spectrum: EchoSpectrum, msidelobe: int = 20,
         grid: RangeGrid | None = None, expected: int | None = None,
         threshold_factor: float = 5.0,
         keep_curves: bool = True) -> list[LocalizationResult]:
    """Single-sweep localization: detect peaks, then angle and range per peak.

    Results are sorted by descending angle.
    """
    peaks = detect_peaks(spectrum, msidelobe, threshold_factor, expected)
    results = []
    for p in peaks:
        angle = angle_from_peak(p.frequency, spectrum.design)
        search, clipped = yolo_range(spectrum, p, msidelobe, grid, keep_curves)
        results.append(LocalizationResult(
            angle_rad=angle, range_m=search.range_m, score=search.score,
            peak=p, window_clipped=clipped, search=search))
    results.sort(key=lambda r: -r.angle_rad)
    return results


def _same_plan(a: BandPlan, b: BandPlan) -> bool:
    return (a.f0 == b.f0 and a.bandwidth == b.bandwidth
            and a.n_subcarriers_minus_one == b.n_subcarriers_minus_one)


def myolo_associate(spectra, msidelobe: int = 20,
                    threshold_factor: float = 5.0,
                    expected: int | None = None,
                    min_detection_fraction: float = 0.5) -> TrackSet:
    """Associate per-sweep peaks into per-target tracks.

    Peaks are matched across sweeps by nearest estimated angle; the gate is
    half the smallest inter-peak separation of the anchor sweep (the sweep
    with the lexicographically smallest squint range, so the association
    does not depend on input order).  Tracks detected in fewer than
    ``min_detection_fraction`` of the sweeps are dropped.
    """
    spectra = list(spectra)
    if not spectra:
        raise ValueError("need at least one sweep spectrum")
    plan, array = spectra[0].plan, spectra[0].design.array
    for s in spectra[1:]:
        if not _same_plan(s.plan, plan) or s.design.array != array:
            raise ValueError("all sweeps must share one band plan and array")
    n_sweeps = len(spectra)

    per_sweep = []
    for s in spectra:
        entries = []
        for p in detect_peaks(s, msidelobe, threshold_factor, expected):
            entries.append((angle_from_peak(p.frequency, s.design), p))
        per_sweep.append(entries)

    anchor = min(range(n_sweeps), key=lambda i: (
        spectra[i].design.sweep.theta_start, spectra[i].design.sweep.theta_end))
    seeds = sorted(per_sweep[anchor], key=lambda e: -e[0])
    if not seeds:
        return TrackSet([], plan, array)
    seed_angles = np.array([a for a, _ in seeds])
    gate = math.pi
    if len(seed_angles) > 1:
        gate = 0.5 * float(np.min(np.abs(np.diff(seed_angles))))

    tracks = [Track(frequencies=np.full(n_sweeps, np.nan),
                    phases=np.full(n_sweeps, np.nan),
                    angles=np.full(n_sweeps, np.nan),
                    powers=np.full(n_sweeps, np.nan),
                    valid=np.zeros(n_sweeps, dtype=bool))
              for _ in seeds]

    def put(track, sweep_idx, angle, peak):
        track.frequencies[sweep_idx] = peak.frequency
        track.phases[sweep_idx] = peak.phase
        track.angles[sweep_idx] = angle
        track.powers[sweep_idx] = peak.power
        track.valid[sweep_idx] = True

    for p_idx in range(n_sweeps):
        if p_idx == anchor:
            for t, (a, pk) in zip(tracks, seeds):
                put(t, p_idx, a, pk)
            continue
        pairs = []
        for j, (a, pk) in enumerate(per_sweep[p_idx]):
            for i, sa in enumerate(seed_angles):
                dist = abs(a - sa)
                if dist <= gate:
                    pairs.append((dist, i, j))
        pairs.sort()
        used_tracks: set[int] = set()
        used_peaks: set[int] = set()
        for dist, i, j in pairs:
            if i in used_tracks or j in used_peaks:
                continue
            used_tracks.add(i)
            used_peaks.add(j)
            a, pk = per_sweep[p_idx][j]
            put(tracks[i], p_idx, a, pk)

    keep = [t for t in tracks if t.count >= min_detection_fraction * n_sweeps]
    return TrackSet(keep, plan, array)


def myolo_range(track: Track, plan: BandPlan,
                grid: RangeGrid | None = None,
                keep_curve: bool = True) -> RangeSearchResult:
    """Range from the per-sweep peak phases of one track.

    The per-sweep peak frequencies differ because every sweep uses a
    slightly different squint range; their phase differences encode the
    range exactly as the sidelobe window does in the single-sweep scheme.
    The score maximum attainable is the number of valid sweeps.
    """
    grid = grid or RangeGrid()
    f = track.frequencies[track.valid]
    phi = track.phases[track.valid]
    if len(np.unique(f)) < 2:
        raise FrequencyDiversityError(
            "all peak frequencies coincide; no diversity for ranging")
    r_max = grid.r_max if grid.r_max is not None else \
        SPEED_OF_LIGHT * plan.n_subcarriers_minus_one / (2.0 * plan.bandwidth)
    return _phase_match_search(f, phi, r_max, grid.step_for(plan),
                               grid.refine_tol, keep_curve,
                               spacing=plan.subcarrier_spacing)


def myolo_angle(track: Track, power_weighted: bool = False) -> float:
    """Final angle of a track: plain (or power-weighted) mean over sweeps."""
    angles = track.angles[track.valid]
    if len(angles) == 0:
        raise ValueError("track has no detections")
    if power_weighted:
        w = track.powers[track.valid]
        return float(np.sum(w * angles) / np.sum(w))
    return float(np.mean(angles))


def myolo(spectra, msidelobe: int = 20, grid: RangeGrid | None = None,
          expected: int | None = None, threshold_factor: float = 5.0,
          power_weighted_angle: bool = False,
          keep_curves: bool = True) -> list[LocalizationResult]:
    """Multi-sweep localization over one subcarrier group."""
    tracks = myolo_associate(spectra, msidelobe, threshold_factor, expected)
    results = []
    for t in tracks:
        search = myolo_range(t, tracks.plan, grid, keep_curves)
        results.append(LocalizationResult(
            angle_rad=myolo_angle(t, power_weighted_angle),
            range_m=search.range_m, score=search.score,
            search=search, track=t))
    results.sort(key=lambda r: -r.angle_rad)
    return results


def baseline_sweep(targets, plan: BandPlan, array: ArrayConfig,
                   angles) -> np.ndarray:
    """Total echo power per look angle of a narrowband time-division sweep.

    Weights are matched at the center frequency only, so with a wide band
    the per-subcarrier beams squint away from the look direction and the
    peak flattens: g(theta_i) = sum_m |w_i^H H_m (w_i^H)^T|.
    """
    f = plan.frequencies()
    fc = plan.carrier
    th = np.asarray(angles, dtype=float)
    n = array.n_antennas
    acc = np.zeros((len(th), len(f)), dtype=complex)
    k = 2.0 * np.pi * array.spacing / SPEED_OF_LIGHT
    for t in targets:
        psi = k * (f[None, :] * math.sin(t.angle_rad) - fc * np.sin(th)[:, None])
        d2 = dirichlet_kernel(psi, n) ** 2
        carrier = np.exp(-1j * 4.0 * np.pi * f * t.range_m / SPEED_OF_LIGHT)
        acc += t.gain * carrier[None, :] * d2 / n
    return np.sum(np.abs(acc), axis=1)
