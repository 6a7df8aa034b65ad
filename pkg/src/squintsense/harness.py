"""Monte-Carlo experiment runner: per-trial synthesis, localization,
estimate-to-truth matching, and RMSE aggregation.

A trial synthesizes the echo of every (group, sweep) pair, adds seeded
noise, localizes per group, fuses groups (angles from the first group,
ranges resolved across groups), and matches estimates to ground truth by
nearest angle.  Reports are bit-reproducible for a fixed master seed; trial
seeds are spawned from it, so parallel and sequential runs agree.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import ambiguity, estimator
from .beamformer import design, dirichlet_kernel
from .echo import NoiseModel, add_noise, echo_closed_form
from .errors import SquintError
from .estimator import RangeGrid
from .scene import (SPEED_OF_LIGHT, AmbiguityPlan, ArrayConfig, MyoloPlan,
                    SweepPlan, Target, validate_geometry)


@dataclass(frozen=True)
class SensingConfig:
    """Estimator knobs shared by the CLI and the harness."""

    msidelobe: int = 20
    threshold_factor: float = 5.0
    expected_targets: int | None = None
    grid: RangeGrid = field(default_factory=RangeGrid)
    power_weighted_angle: bool = False
    resolve_tol: float = 0.5
    match_gate: float | None = None  # radians; None derives one from the scene


@dataclass(frozen=True)
class RandomScene:
    """K targets drawn once per report, uniform over a polar box."""

    count: int
    range_interval: tuple[float, float]
    angle_interval: tuple[float, float]
    min_separation_bins: int = 2


@dataclass(frozen=True)
class ExperimentSpec:
    array: ArrayConfig
    sweep: SweepPlan
    ambiguity: AmbiguityPlan
    scene: tuple[Target, ...] | RandomScene
    estimator: str = "myolo"
    myolo: MyoloPlan | None = None
    snr_db: tuple[float, ...] = (0.0,)
    trials: int = 100
    seed: int = 0
    sigma2: float = 1.0
    noise_reference: str = "element"
    sensing: SensingConfig = field(default_factory=SensingConfig)
    baseline_angles: tuple[float, ...] | None = None
    workers: int = 1

    def __post_init__(self):
        if self.estimator not in ("yolo", "myolo", "baseline"):
            raise ValueError("estimator must be yolo, myolo or baseline")
        if self.estimator == "myolo":
            if self.myolo is None:
                raise ValueError("myolo estimator needs a MyoloPlan")
            if not self.myolo.covers(self.sweep):
                raise ValueError("every sweep must cover the sensing range")
        if self.estimator == "baseline" and self.baseline_angles is None:
            raise ValueError("baseline estimator needs a look-angle grid")
        if self.trials < 1:
            raise ValueError("trial count must be >= 1")


@dataclass(frozen=True)
class TargetRmse:
    true_range: float
    true_angle: float
    rmse_angle_deg: float
    rmse_range: float
    matched: int
    missed: int


@dataclass(frozen=True)
class RmseReport:
    snr_db: float
    trials: int
    per_target: tuple[TargetRmse, ...]
    false_alarms: int

    @property
    def average_rmse_angle_deg(self) -> float:
        return float(np.mean([t.rmse_angle_deg for t in self.per_target]))

    @property
    def max_rmse_angle_deg(self) -> float:
        return float(np.max([t.rmse_angle_deg for t in self.per_target]))

    @property
    def average_rmse_range(self) -> float:
        return float(np.mean([t.rmse_range for t in self.per_target]))

    @property
    def max_rmse_range(self) -> float:
        return float(np.max([t.rmse_range for t in self.per_target]))

    @property
    def miss_rate(self) -> float:
        total = sum(t.matched + t.missed for t in self.per_target)
        return sum(t.missed for t in self.per_target) / total if total else 0.0


@dataclass(frozen=True)
class Estimate:
    """One fused target estimate out of the multi-group pipeline."""

    angle_rad: float
    range_m: float
    group_ranges: tuple[float, ...]
    resolution: ambiguity.Resolution | None


def group_designs(spec_array: ArrayConfig, groups, sweeps) -> list[list]:
    """designs[group][sweep] for every (group plan, sweep plan) pair."""
    out = []
    for plan in groups:
        validate_geometry(spec_array, plan)
        out.append([design(s, plan, spec_array) for s in sweeps])
    return out


def synthesize_spectra(targets, designs, noise: NoiseModel,
                       rng: np.random.Generator | None = None):
    """spectra[group][sweep], noise drawn in a fixed order."""
    return [[add_noise(echo_closed_form(targets, d), noise, rng) for d in row]
            for row in designs]


def _localize_group(spectra_row, kind: str, cfg: SensingConfig):
    if kind == "yolo":
        return estimator.yolo(
            spectra_row[0], cfg.msidelobe, cfg.grid,
            cfg.expected_targets, cfg.threshold_factor, keep_curves=False)
    return estimator.myolo(
        spectra_row, cfg.msidelobe, cfg.grid, cfg.expected_targets,
        cfg.threshold_factor, cfg.power_weighted_angle, keep_curves=False)


def _greedy_angle_match(ref_angles, angles, gate: float):
    """Greedy nearest-angle assignment; returns ref_index -> index or None."""
    pairs = []
    for i, ra in enumerate(ref_angles):
        for j, a in enumerate(angles):
            d = abs(ra - a)
            if d <= gate:
                pairs.append((d, i, j))
    pairs.sort()
    out: dict[int, int] = {}
    used: set[int] = set()
    for d, i, j in pairs:
        if i in out or j in used:
            continue
        out[i] = j
        used.add(j)
    return out


def _derived_gate(angles) -> float:
    angles = np.sort(np.asarray(angles, dtype=float))
    if len(angles) < 2:
        return math.pi
    return 0.5 * float(np.min(np.diff(angles)))


def localize_groups(spectra, plan: AmbiguityPlan, kind: str,
                    cfg: SensingConfig) -> list[Estimate]:
    """Fuse per-group localization results into resolved estimates.

    Angles come from the first group (the published estimates are per one
    subcarrier grid); further groups contribute their principal ranges for
    ambiguity resolution.  A target missing in any group stays unresolved
    and is dropped (counted as a miss upstream).
    """
    per_group = [_localize_group(row, kind, cfg) for row in spectra]
    primary = per_group[0]
    if not primary:
        return []
    gate = cfg.match_gate if cfg.match_gate is not None else \
        _derived_gate([r.angle_rad for r in primary])
    estimates = []
    for i, res in enumerate(primary):
        principals = [res.range_m]
        ok = True
        for q in range(1, len(per_group)):
            match = _greedy_angle_match(
                [r.angle_rad for r in primary],
                [r.angle_rad for r in per_group[q]], gate)
            if i not in match:
                ok = False
                break
            principals.append(per_group[q][match[i]].range_m)
        if not ok:
            continue
        try:
            resolution = ambiguity.resolve(
                principals, plan.groups, plan.r_sense_max, cfg.resolve_tol)
        except SquintError:
            continue
        estimates.append(Estimate(
            angle_rad=res.angle_rad, range_m=resolution.range_m,
            group_ranges=tuple(principals), resolution=resolution))
    return estimates


def _baseline_estimates(targets, spec: ExperimentSpec, snr_db: float,
                        rng: np.random.Generator) -> list[float]:
    """Angle-only estimates from the narrowband time-division sweep."""
    plan = spec.ambiguity.primary
    f = plan.frequencies()
    fc = plan.carrier
    th = np.asarray(spec.baseline_angles, dtype=float)
    n = spec.array.n_antennas
    k = 2.0 * np.pi * spec.array.spacing / SPEED_OF_LIGHT
    acc = np.zeros((len(th), len(f)), dtype=complex)
    for t in targets:
        psi = k * (f[None, :] * math.sin(t.angle_rad) - fc * np.sin(th)[:, None])
        carrier = np.exp(-1j * 4.0 * np.pi * f * t.range_m / SPEED_OF_LIGHT)
        acc += t.gain * carrier[None, :] * dirichlet_kernel(psi, n) ** 2 / n
    peak = float(np.max(np.abs(acc)))
    snr = 10.0 ** (snr_db / 10.0)
    credit = n if spec.noise_reference == "element" else 1.0
    scale = math.sqrt(snr * spec.sigma2 * credit) / peak if peak > 0 else 1.0
    noise = (rng.standard_normal(acc.shape) + 1j * rng.standard_normal(acc.shape)) \
        * math.sqrt(spec.sigma2 / 2.0)
    g = np.sum(np.abs(scale * acc + noise), axis=1)
    want = spec.sensing.expected_targets or len(targets)
    interior = np.where((g[1:-1] > g[:-2]) & (g[1:-1] > g[2:]))[0] + 1
    order = interior[np.argsort(g[interior])[::-1]][:want]
    return [float(th[i]) for i in order]


def draw_random_scene(scene: RandomScene, spec: ExperimentSpec,
                      rng: np.random.Generator) -> tuple[Target, ...]:
    """Rejection-sample angles with the configured minimum separation."""
    plan = spec.ambiguity.primary
    span = abs(spec.sweep.sin_start - spec.sweep.sin_end)
    min_sep_sin = scene.min_separation_bins * span / plan.n_subcarriers_minus_one
    lo, hi = scene.angle_interval
    for _ in range(10000):
        angles = np.sort(rng.uniform(lo, hi, scene.count))
        if scene.count == 1 or np.min(np.diff(np.sin(angles))) >= min_sep_sin:
            break
    else:
        raise ValueError("could not place targets with the requested separation")
    ranges = rng.uniform(*scene.range_interval, scene.count)
    return tuple(Target.with_default_gain(float(r), float(a), spec.array.carrier_ref)
                 for r, a in zip(ranges, angles))


def _trial(spec: ExperimentSpec, targets, designs, snr_db: float,
           trial_seed) -> list[tuple[float, float]]:
    """One trial: raw (angle, range) estimates.

    Matching against the truth happens in the caller so the per-target
    accumulation stays in one place.
    """
    rng = np.random.Generator(np.random.Philox(trial_seed))
    noise = NoiseModel(snr_db=snr_db, sigma2=spec.sigma2,
                       reference=spec.noise_reference)
    if spec.estimator == "baseline":
        angles = _baseline_estimates(targets, spec, snr_db, rng)
        return [(a, math.nan) for a in angles]
    spectra = synthesize_spectra(targets, designs, noise, rng)
    estimates = localize_groups(spectra, spec.ambiguity, spec.estimator,
                                spec.sensing)
    return [(e.angle_rad, e.range_m) for e in estimates]


def _trial_batch(args):
    spec, targets, designs, snr_db, seeds = args
    return [_trial(spec, targets, designs, snr_db, s) for s in seeds]


def run(spec: ExperimentSpec) -> tuple[RmseReport, ...]:
    """Run the experiment at every SNR in the spec; deterministic per seed."""
    root = np.random.SeedSequence(spec.seed)
    scene_seq, *snr_seqs = root.spawn(1 + len(spec.snr_db))
    if isinstance(spec.scene, RandomScene):
        targets = draw_random_scene(
            spec.scene, spec, np.random.Generator(np.random.Philox(scene_seq)))
    else:
        targets = tuple(spec.scene)
    sweeps = list(spec.myolo.sweeps) if spec.estimator == "myolo" else [spec.sweep]
    designs = group_designs(spec.array, spec.ambiguity.groups, sweeps)

    truth_angles = np.array([t.angle_rad for t in targets])
    gate = spec.sensing.match_gate if spec.sensing.match_gate is not None \
        else _derived_gate(truth_angles)

    reports = []
    for snr_db, seq in zip(spec.snr_db, snr_seqs):
        trial_seeds = seq.spawn(spec.trials)
        if spec.workers > 1:
            chunks = np.array_split(np.arange(spec.trials), spec.workers)
            jobs = [(spec, targets, designs, snr_db,
                     [trial_seeds[i] for i in c]) for c in chunks if len(c)]
            with ProcessPoolExecutor(max_workers=spec.workers) as pool:
                batches = list(pool.map(_trial_batch, jobs))
            all_estimates = [est for batch in batches for est in batch]
        else:
            all_estimates = [_trial(spec, targets, designs, snr_db, s)
                             for s in trial_seeds]

        sq_angle = [[] for _ in targets]
        sq_range = [[] for _ in targets]
        missed = [0] * len(targets)
        false_alarms = 0
        for estimates in all_estimates:
            match = _greedy_angle_match(
                truth_angles, [a for a, _ in estimates], gate)
            false_alarms += len(estimates) - len(match)
            for k, t in enumerate(targets):
                if k not in match:
                    missed[k] += 1
                    continue
                a_hat, r_hat = estimates[match[k]]
                sq_angle[k].append(math.degrees(a_hat - t.angle_rad) ** 2)
                if not math.isnan(r_hat):
                    sq_range[k].append((r_hat - t.range_m) ** 2)
        per_target = []
        for k, t in enumerate(targets):
            n_ok = len(sq_angle[k])
            # fsum keeps the aggregation order-independent across workers
            rmse_a = math.sqrt(math.fsum(sq_angle[k]) / n_ok) if n_ok else math.nan
            rmse_r = math.sqrt(math.fsum(sq_range[k]) / len(sq_range[k])) \
                if sq_range[k] else math.nan
            per_target.append(TargetRmse(
                true_range=t.range_m, true_angle=t.angle_rad,
                rmse_angle_deg=rmse_a, rmse_range=rmse_r,
                matched=n_ok, missed=missed[k]))
        reports.append(RmseReport(snr_db=snr_db, trials=spec.trials,
                                  per_target=tuple(per_target),
                                  false_alarms=false_alarms))
    return tuple(reports)


def _apply_axis(spec: ExperimentSpec, axis: str, value,
                widen_step: float) -> ExperimentSpec:
    if axis == "bandwidth_hz":
        groups = tuple(replace(g, bandwidth=float(value))
                       for g in spec.ambiguity.groups)
        amb = AmbiguityPlan(groups, spec.ambiguity.r_sense_max)
        return replace(spec, ambiguity=amb)
    if axis == "n_antennas":
        return replace(spec, array=replace(spec.array, n_antennas=int(value)))
    if axis == "sweep_count":
        return replace(spec, myolo=MyoloPlan.widened(
            spec.sweep, int(value), widen_step))
    if axis == "subcarriers":
        amb = AmbiguityPlan.from_counts(
            spec.ambiguity.primary, value, spec.ambiguity.r_sense_max)
        return replace(spec, ambiguity=amb)
    if axis == "targets":
        if not isinstance(spec.scene, RandomScene):
            raise ValueError("the targets axis needs a random scene")
        return replace(spec, scene=replace(spec.scene, count=int(value)))
    raise ValueError(f"unknown sweep axis {axis!r}")


def sweep(spec: ExperimentSpec, axis: str, values,
          widen_step: float = math.radians(1.0)):
    """Run the experiment once per axis value; returns [(value, reports)]."""
    return [(v, run(_apply_axis(spec, axis, v, widen_step))) for v in values]


def default_workers() -> int:
    """Worker count from the environment, for the CLI."""
    raw = os.environ.get("SQUINTSENSE_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
