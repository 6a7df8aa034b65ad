"""Config file loading: a YAML/JSON key-value tree mapped onto scene objects.

Units at the file boundary: degrees, meters, Hz.  Schema:

    array:
      n_antennas: 128
      spacing: half_wavelength_f0     # or half_wavelength_fc, or meters
    band:
      f0_hz: 220.0e9
      bandwidth_hz: 1.0e9
      subcarriers_minus_one: 2048
    sweep: {start_deg: 60.0, end_deg: -60.0}
    targets:
      - {range_m: 50.0, angle_deg: 50.0}          # optional gain_re/gain_im
    ambiguity:                                     # optional (single group otherwise)
      subcarriers_minus_one: [2048, 2515]
      max_sensing_range_m: 300.0
      resolve_tol_m: 0.5
    myolo:                                         # optional
      sweeps: [{start_deg: 61.0, end_deg: -61.0}, ...]
      # or: {count: 10, widen_step_deg: 1.0}
    noise: {snr_db: 0.0, sigma2: 1.0, seed: 1, reference: element}   # optional
    detection: {msidelobe: 20, threshold_factor: 5.0, expected_targets: 4}
    search: {coarse_divisor: 20, refine_tol_m: 1.0e-4}
    baseline: {start_deg: -90.0, end_deg: 90.0, count: 361}
    experiment:
      estimator: myolo
      trials: 100
      snr_db: [-5, 0, 5, 10, 15]
      seed: 7
      axis: {name: bandwidth_hz, values: [1.0e9, 10.0e9]}            # optional
      random_scene: {count: 6, range_m: [30, 280], angle_deg: [-55, 55]}
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import yaml

from .echo import NoiseModel
from .errors import ConfigError
from .estimator import RangeGrid
from .harness import ExperimentSpec, RandomScene, SensingConfig
from .scene import (SPEED_OF_LIGHT, AmbiguityPlan, ArrayConfig, BandPlan,
                    MyoloPlan, SweepPlan, Target, validate_geometry)


@dataclass(frozen=True)
class Scenario:
    """Everything a CLI run needs, resolved from one config file."""

    array: ArrayConfig
    band: BandPlan
    sweep: SweepPlan
    targets: tuple[Target, ...]
    ambiguity: AmbiguityPlan
    myolo: MyoloPlan | None
    noise: NoiseModel
    sensing: SensingConfig
    baseline_angles: tuple[float, ...]
    experiment: ExperimentSpec | None
    raw: dict


def _require(tree: dict, key: str) -> dict:
    if key not in tree:
        raise ConfigError(f"missing config section {key!r}")
    return tree[key]


def _sweep_from(node: dict) -> SweepPlan:
    return SweepPlan(math.radians(float(node["start_deg"])),
                     math.radians(float(node["end_deg"])))


def load_tree(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    tree = yaml.safe_load(text)
    if not isinstance(tree, dict):
        raise ConfigError(f"config root must be a mapping: {path}")
    return tree


def load_scenario(path) -> Scenario:
    tree = load_tree(path)

    band_node = _require(tree, "band")
    band = BandPlan(float(band_node["f0_hz"]), float(band_node["bandwidth_hz"]),
                    int(band_node["subcarriers_minus_one"]))

    array_node = _require(tree, "array")
    spacing = array_node.get("spacing", "half_wavelength_f0")
    if spacing == "half_wavelength_f0":
        d = SPEED_OF_LIGHT / (2.0 * band.f0)
    elif spacing == "half_wavelength_fc":
        d = SPEED_OF_LIGHT / (2.0 * band.carrier)
    else:
        d = float(spacing)
    array = ArrayConfig(int(array_node["n_antennas"]), d, band.carrier)
    validate_geometry(array, band)

    sweep = _sweep_from(_require(tree, "sweep"))

    targets = []
    for node in tree.get("targets", []):
        r = float(node["range_m"])
        a = math.radians(float(node["angle_deg"]))
        if "gain_re" in node or "gain_im" in node:
            g = complex(float(node.get("gain_re", 0.0)),
                        float(node.get("gain_im", 0.0)))
            targets.append(Target(r, a, g))
        else:
            targets.append(Target.with_default_gain(r, a, array.carrier_ref))

    amb_node = tree.get("ambiguity")
    resolve_tol = 0.5
    if amb_node:
        counts = [int(c) for c in amb_node["subcarriers_minus_one"]]
        amb = AmbiguityPlan.from_counts(
            band, counts, float(amb_node["max_sensing_range_m"]))
        resolve_tol = float(amb_node.get("resolve_tol_m", 0.5))
    else:
        # single group: the sensing limit is the band's own unambiguous range
        r_u = SPEED_OF_LIGHT * band.n_subcarriers_minus_one / (2.0 * band.bandwidth)
        amb = AmbiguityPlan((band,), r_u * (1.0 - 1e-9))

    myolo_node = tree.get("myolo")
    myolo = None
    if myolo_node:
        if "sweeps" in myolo_node:
            myolo = MyoloPlan(tuple(_sweep_from(s) for s in myolo_node["sweeps"]))
        else:
            myolo = MyoloPlan.widened(
                sweep, int(myolo_node["count"]),
                math.radians(float(myolo_node.get("widen_step_deg", 1.0))))
        if not myolo.covers(sweep):
            raise ConfigError("every myolo sweep must cover the sensing range")

    noise_node = tree.get("noise")
    if noise_node:
        noise = NoiseModel(
            snr_db=float(noise_node["snr_db"]),
            sigma2=float(noise_node.get("sigma2", 1.0)),
            seed=int(noise_node.get("seed", 0)),
            reference=str(noise_node.get("reference", "element")))
    else:
        noise = NoiseModel(snr_db=None)

    det = tree.get("detection", {})
    search = tree.get("search", {})
    sensing = SensingConfig(
        msidelobe=int(det.get("msidelobe", 20)),
        threshold_factor=float(det.get("threshold_factor", 5.0)),
        expected_targets=(int(det["expected_targets"])
                          if det.get("expected_targets") is not None else None),
        grid=RangeGrid(
            coarse_divisor=int(search.get("coarse_divisor", 20)),
            coarse_step=(float(search["coarse_step_m"])
                         if search.get("coarse_step_m") is not None else None),
            refine_tol=float(search.get("refine_tol_m", 1e-4))),
        resolve_tol=resolve_tol)

    base = tree.get("baseline", {})
    baseline_angles = tuple(
        math.radians(x) for x in _linspace(
            float(base.get("start_deg", -90.0)),
            float(base.get("end_deg", 90.0)),
            int(base.get("count", 361))))

    exp_node = tree.get("experiment")
    experiment = None
    if exp_node:
        kind = str(exp_node.get("estimator", "myolo"))
        scene_node = exp_node.get("random_scene")
        if scene_node:
            scene = RandomScene(
                count=int(scene_node["count"]),
                range_interval=tuple(float(x) for x in scene_node["range_m"]),
                angle_interval=tuple(math.radians(float(x))
                                     for x in scene_node["angle_deg"]),
                min_separation_bins=int(scene_node.get("min_separation_bins", 2)))
        else:
            if not targets:
                raise ConfigError("experiment needs targets or a random_scene")
            scene = tuple(targets)
        snr_list = exp_node.get("snr_db", [0.0])
        if not isinstance(snr_list, (list, tuple)):
            snr_list = [snr_list]
        experiment = ExperimentSpec(
            array=array, sweep=sweep, ambiguity=amb, scene=scene,
            estimator=kind, myolo=myolo,
            snr_db=tuple(float(s) for s in snr_list),
            trials=int(exp_node.get("trials", 100)),
            seed=int(exp_node.get("seed", 0)),
            sigma2=float(noise.sigma2),
            noise_reference=noise.reference,
            sensing=sensing,
            baseline_angles=baseline_angles if kind == "baseline" else None)

    return Scenario(array=array, band=band, sweep=sweep,
                    targets=tuple(targets), ambiguity=amb, myolo=myolo,
                    noise=noise, sensing=sensing,
                    baseline_angles=baseline_angles,
                    experiment=experiment, raw=tree)


def _linspace(lo: float, hi: float, count: int) -> list[float]:
    if count < 2:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def snapshot(tree: dict) -> str:
    """Canonical JSON snapshot of a config tree for run manifests."""
    return json.dumps(tree, sort_keys=True, default=str)
