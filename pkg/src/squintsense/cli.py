"""Command-line front end.

Subcommands: simulate, locate, design-export, baseline-sweep, rmse-sweep,
resolve.  Every run writes a manifest.json with the resolved config
snapshot, seed, code version and output paths, so any output file can be
regenerated from its manifest.  Delimited text output uses shortest
round-trip decimals, so written doubles re-read bit-identically.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, ambiguity, harness
from .beamformer import design, physical_delays, squint_map
from .config import Scenario, load_scenario
from .echo import EchoSpectrum, NoiseModel, add_noise, echo_closed_form
from .errors import SquintError
from .estimator import baseline_sweep
from .harness import localize_groups, synthesize_spectra


def _fmt(x: float) -> str:
    """Shortest decimal that round-trips to the same double."""
    return repr(float(x))


def write_spectrum_csv(path: Path, spectrum: EchoSpectrum) -> None:
    f = spectrum.plan.frequencies()
    g = spectrum.power()
    ph = spectrum.phases()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("m,f_hz,re,im,power,phase\n")
        for m, (fm, v, gm, pm) in enumerate(zip(f, spectrum.values, g, ph)):
            fh.write(f"{m},{_fmt(fm)},{_fmt(v.real)},{_fmt(v.imag)},"
                     f"{_fmt(gm)},{_fmt(pm)}\n")


def read_spectrum_csv(path: Path, design_obj) -> EchoSpectrum:
    values = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        re_i, im_i = header.index("re"), header.index("im")
        for line in fh:
            cols = line.strip().split(",")
            values.append(complex(float(cols[re_i]), float(cols[im_i])))
    values = np.asarray(values, dtype=complex)
    if len(values) != design_obj.plan.n_subcarriers:
        raise SquintError(f"{path}: expected {design_obj.plan.n_subcarriers} "
                          f"rows, found {len(values)}")
    return EchoSpectrum(values, design_obj)


def _write_manifest(out_dir: Path, command: str, scenario: Scenario | None,
                    seed, outputs: list[Path], extra: dict | None = None) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "created": datetime.now(timezone.utc).isoformat(),
        "seed": seed,
        "config": scenario.raw if scenario is not None else None,
        "outputs": [p.name for p in outputs],
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return path


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    noise = scenario.noise
    if args.no_noise:
        noise = NoiseModel(snr_db=None)
    else:
        if args.snr_db is not None:
            noise = dataclasses.replace(noise, snr_db=args.snr_db)
        if args.seed is not None and noise.snr_db is not None:
            noise = dataclasses.replace(noise, seed=args.seed)
    sensing = scenario.sensing
    if args.msidelobe is not None:
        sensing = dataclasses.replace(sensing, msidelobe=args.msidelobe)
    if args.grid_step is not None:
        sensing = dataclasses.replace(
            sensing, grid=dataclasses.replace(sensing.grid,
                                              coarse_step=args.grid_step))
    return dataclasses.replace(scenario, noise=noise, sensing=sensing)


def _sweeps_for(scenario: Scenario, kind: str):
    if kind == "myolo":
        if scenario.myolo is None:
            raise SquintError("config has no myolo section")
        return list(scenario.myolo.sweeps)
    return [scenario.sweep]


def _spectrum_name(q: int, p: int) -> str:
    return f"spectrum_q{q}_p{p}.csv"


def _cmd_simulate(args, out_dir: Path) -> int:
    scenario = _apply_overrides(load_scenario(args.config), args)
    kind = args.estimator or ("myolo" if scenario.myolo else "yolo")
    sweeps = _sweeps_for(scenario, kind)
    designs = harness.group_designs(scenario.array, scenario.ambiguity.groups,
                                    sweeps)
    spectra = synthesize_spectra(scenario.targets, designs, scenario.noise)
    outputs = []
    for q, row in enumerate(spectra):
        for p, spectrum in enumerate(row):
            path = out_dir / _spectrum_name(q, p)
            write_spectrum_csv(path, spectrum)
            outputs.append(path)
    _write_manifest(out_dir, "simulate", scenario, scenario.noise.seed, outputs,
                    {"estimator": kind, "n_groups": len(spectra),
                     "n_sweeps": len(sweeps)})
    print(f"wrote {len(outputs)} spectra to {out_dir}")
    return 0


def _load_spectra_dir(path: Path, scenario: Scenario, kind: str):
    manifest_path = path / "manifest.json"
    if not manifest_path.exists():
        raise SquintError(f"no manifest.json under {path}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    sweeps = _sweeps_for(scenario, kind)
    if manifest.get("n_sweeps") != len(sweeps) \
            or manifest.get("n_groups") != len(scenario.ambiguity.groups):
        raise SquintError("spectra directory does not match the config layout")
    designs = harness.group_designs(scenario.array, scenario.ambiguity.groups,
                                    sweeps)
    return [[read_spectrum_csv(path / _spectrum_name(q, p), d)
             for p, d in enumerate(row)]
            for q, row in enumerate(designs)]


def _cmd_locate(args, out_dir: Path) -> int:
    scenario = _apply_overrides(load_scenario(args.config), args)
    kind = args.estimator or ("myolo" if scenario.myolo else "yolo")
    sweeps = _sweeps_for(scenario, kind)
    if args.spectra:
        spectra = _load_spectra_dir(Path(args.spectra), scenario, kind)
    else:
        designs = harness.group_designs(scenario.array,
                                        scenario.ambiguity.groups, sweeps)
        spectra = synthesize_spectra(scenario.targets, designs, scenario.noise)
    estimates = localize_groups(spectra, scenario.ambiguity, kind,
                                scenario.sensing)

    results_path = out_dir / "results.csv"
    outputs = [results_path]
    with open(results_path, "w", encoding="utf-8") as fh:
        fh.write("target,angle_deg,range_m,score_range,principal_group0_m\n")
        for i, e in enumerate(estimates):
            score = e.resolution.residual if e.resolution else math.nan
            fh.write(f"{i},{_fmt(math.degrees(e.angle_rad))},{_fmt(e.range_m)},"
                     f"{_fmt(score)},{_fmt(e.group_ranges[0])}\n")
    print(f"{'target':>6} {'angle_deg':>12} {'range_m':>12}")
    for i, e in enumerate(estimates):
        print(f"{i:>6} {math.degrees(e.angle_rad):>12.4f} {e.range_m:>12.4f}")

    if args.curves:
        cfg = scenario.sensing
        per_group = [harness._localize_group(row, kind, cfg)
                     for row in spectra]
        for q, results in enumerate(per_group):
            for i, res in enumerate(results):
                if res.search is None or res.search.ranges is None:
                    continue
                path = out_dir / f"curve_t{i}_q{q}.csv"
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write("range_m,score\n")
                    for r, s in zip(res.search.ranges, res.search.scores):
                        fh.write(f"{_fmt(r)},{_fmt(s)}\n")
                outputs.append(path)

    _write_manifest(out_dir, "locate", scenario, scenario.noise.seed, outputs,
                    {"estimator": kind, "n_targets": len(estimates)})
    return 0


def _cmd_design_export(args, out_dir: Path) -> int:
    scenario = _apply_overrides(load_scenario(args.config), args)
    d = design(scenario.sweep, scenario.band, scenario.array)
    design_path = out_dir / "design.csv"
    with open(design_path, "w", encoding="utf-8") as fh:
        fh.write("antenna_index,ps_phase_deg,ttd_ps\n")
        # phases are kept unreduced internally; reduce mod one turn on export
        for n, phi, t in zip(scenario.array.indices(),
                             d.ps_phases % 1.0, physical_delays(d)):
            fh.write(f"{_fmt(n)},{_fmt(phi * 360.0)},{_fmt(t * 1e12)}\n")
    map_path = out_dir / "squint_map.csv"
    angles = squint_map(d)
    f = scenario.band.frequencies()
    with open(map_path, "w", encoding="utf-8") as fh:
        fh.write("m,f_hz,angle_deg\n")
        for m, (fm, a) in enumerate(zip(f, angles)):
            fh.write(f"{m},{_fmt(fm)},{_fmt(math.degrees(a))}\n")
    _write_manifest(out_dir, "design-export", scenario, None,
                    [design_path, map_path])
    print(f"wrote {design_path.name} and {map_path.name} to {out_dir}")
    return 0


def _cmd_baseline_sweep(args, out_dir: Path) -> int:
    scenario = _apply_overrides(load_scenario(args.config), args)
    angles = np.asarray(scenario.baseline_angles)
    g = baseline_sweep(scenario.targets, scenario.band, scenario.array, angles)
    path = out_dir / "baseline.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("angle_deg,power\n")
        for a, gv in zip(angles, g):
            fh.write(f"{_fmt(math.degrees(a))},{_fmt(gv)}\n")
    _write_manifest(out_dir, "baseline-sweep", scenario, None, [path])
    print(f"wrote {path}")
    return 0


def _cmd_rmse_sweep(args, out_dir: Path) -> int:
    scenario = _apply_overrides(load_scenario(args.config), args)
    if scenario.experiment is None:
        raise SquintError("config has no experiment section")
    spec = scenario.experiment
    if args.estimator:
        spec = dataclasses.replace(spec, estimator=args.estimator)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    if args.trials is not None:
        spec = dataclasses.replace(spec, trials=args.trials)
    spec = dataclasses.replace(spec, sensing=scenario.sensing,
                               workers=harness.default_workers())

    axis_node = scenario.raw.get("experiment", {}).get("axis")
    if axis_node:
        rows = harness.sweep(spec, str(axis_node["name"]), axis_node["values"])
    else:
        rows = [(None, harness.run(spec))]

    path = out_dir / "rmse.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("axis_value,snr_db,target,true_range_m,true_angle_deg,"
                 "rmse_angle_deg,rmse_range_m,matched,missed,"
                 "avg_rmse_angle_deg,avg_rmse_range_m,miss_rate\n")
        for value, reports in rows:
            vtxt = "" if value is None else _fmt(value) if isinstance(value, float) \
                else str(value)
            for rep in reports:
                for k, t in enumerate(rep.per_target):
                    fh.write(
                        f"{vtxt},{_fmt(rep.snr_db)},{k},{_fmt(t.true_range)},"
                        f"{_fmt(math.degrees(t.true_angle))},"
                        f"{_fmt(t.rmse_angle_deg)},{_fmt(t.rmse_range)},"
                        f"{t.matched},{t.missed},"
                        f"{_fmt(rep.average_rmse_angle_deg)},"
                        f"{_fmt(rep.average_rmse_range)},"
                        f"{_fmt(rep.miss_rate)}\n")
    _write_manifest(out_dir, "rmse-sweep", scenario, spec.seed, [path],
                    {"estimator": spec.estimator, "trials": spec.trials})
    print(f"wrote {path}")
    return 0


def _cmd_resolve(args, out_dir: Path) -> int:
    scenario = _apply_overrides(load_scenario(args.config), args)
    plan = scenario.ambiguity
    principals = [float(x) for x in args.peaks.split(",")]
    res = ambiguity.resolve(principals, plan.groups, plan.r_sense_max,
                            scenario.sensing.resolve_tol)
    lines = []
    exact = ambiguity.combined_unambiguous_distance(plan.groups)
    near = ambiguity.near_coincidence_distance(
        plan.groups, scenario.sensing.resolve_tol, plan.r_sense_max * 10)
    for q, (p, ru, l, gr) in enumerate(zip(principals, res.unambiguous,
                                           res.branch_indices, res.group_ranges)):
        lines.append(f"group {q}: R_u = {ru:.4f} m, principal = {p:.4f} m, "
                     f"branch l = {l}, alias = {gr:.4f} m")
    lines.append(f"resolved range = {res.range_m:.4f} m "
                 f"(worst-group residual {res.residual:.4f} m)")
    lines.append(f"combined unambiguous distance (exact lattice) = {exact:.1f} m")
    lines.append("nearest tolerance-based lattice coincidence = "
                 + (f"{near:.1f} m" if near is not None else "none below cap"))
    report = "\n".join(lines) + "\n"
    path = out_dir / "resolve.txt"
    path.write_text(report, encoding="utf-8")
    print(report, end="")
    _write_manifest(out_dir, "resolve", scenario, None, [path],
                    {"principals": principals})
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "locate": _cmd_locate,
    "design-export": _cmd_design_export,
    "baseline-sweep": _cmd_baseline_sweep,
    "rmse-sweep": _cmd_rmse_sweep,
    "resolve": _cmd_resolve,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squintsense",
        description="Wideband OFDM sensing with controllable beam squint")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="scenario config file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--snr-db", type=float, default=None)
    common.add_argument("--no-noise", action="store_true")
    common.add_argument("--msidelobe", type=int, default=None,
                        help="sidelobe half-window (bins)")
    common.add_argument("--grid-step", type=float, default=None,
                        help="coarse range-search step in meters")

    p = sub.add_parser("simulate", parents=[common],
                       help="synthesize echo spectra to CSV")
    p.add_argument("--estimator", choices=["yolo", "myolo"], default=None)

    p = sub.add_parser("locate", parents=[common],
                       help="estimate target angles and ranges")
    p.add_argument("--estimator", choices=["yolo", "myolo"], default=None)
    p.add_argument("--spectra", default=None,
                   help="directory with spectra from a simulate run")
    p.add_argument("--curves", action="store_true",
                   help="also dump the range-search curves")

    sub.add_parser("design-export", parents=[common],
                   help="export PS phases, TTD delays and the squint map")
    sub.add_parser("baseline-sweep", parents=[common],
                   help="narrowband time-division sweep power curve")

    p = sub.add_parser("rmse-sweep", parents=[common],
                       help="Monte-Carlo RMSE experiment")
    p.add_argument("--estimator", choices=["yolo", "myolo", "baseline"],
                   default=None)
    p.add_argument("--trials", type=int, default=None)

    p = sub.add_parser("resolve", parents=[common],
                       help="resolve a range from per-group principal peaks")
    p.add_argument("--peaks", required=True,
                   help="comma-separated principal peaks, one per group (m)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](args, out_dir)
    except (SquintError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
