"""Command line batch runner.

    radsense run --scenario <file> --out <dir> [--max-order N] [--grid-cell M]
                 [--noise-dbm X --seed S] [--threshold T | --calibrate-margin K]
                 [--dump-paths] [--dump-cir] [--max-seconds B] [--workers W]
    radsense sweep --manifest <file> --out <dir>

Exit status: 0 on success, 1 on invalid input, 2 if ``--max-seconds`` is exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from radsense import artifacts
from radsense.channel import cir_to_csv
from radsense.pipeline import empty_scene_heatmap, run_sensing
from radsense.raytrace import paths_to_json
from radsense.scene import Scenario, ScenarioError, load_scenario
from radsense.sensing import (DEFAULT_MARGIN, Heatmap, OccupancyReport, SensingError,
                              calibrate_threshold, detect, footprint_contrast, region_mask,
                              score_lots)

log = logging.getLogger("radsense")

# Fixed so contrast values stay comparable across bandwidths.
FOOTPRINT_DILATION = 0.375


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class RunConfig:
    scenario: str
    out: str | None = None
    max_order: int | None = None
    grid_cell: float | None = None
    bandwidth: float | None = None
    noise_dbm: float | None = None
    seed: int = 0
    threshold: float | None = None
    calibrate_margin: float | None = None
    dump_paths: bool = False
    dump_cir: bool = False
    max_seconds: float | None = None
    workers: int = 1
    name: str = ""

    def __post_init__(self):
        if self.threshold is not None and self.calibrate_margin is not None:
            raise ValueError("use either an explicit threshold or a calibration margin, not both")
        if self.threshold is None and self.calibrate_margin is None:
            self.calibrate_margin = DEFAULT_MARGIN
        if self.max_order is not None and not 0 <= self.max_order <= 3:
            raise ValueError("max_order must be in [0, 3]")


@dataclass
class RunOutcome:
    scenario: Scenario
    heatmap: Heatmap
    report: OccupancyReport
    files: dict[str, bytes] = field(default_factory=dict)
    elapsed: float = 0.0


def prepare_scenario(config: RunConfig) -> Scenario:
    s = load_scenario(config.scenario)
    if config.bandwidth is not None:
        s = s.with_radio(bandwidth=float(config.bandwidth))
    if config.grid_cell is not None:
        s = s.replace(grid=s.grid.with_cell_size(float(config.grid_cell)))
    return s


def execute(config: RunConfig) -> RunOutcome:
    """Run the whole chain in memory; raises on invalid input or budget overrun."""
    start = time.perf_counter()

    def check_budget(stage):
        if config.max_seconds is not None and time.perf_counter() - start > config.max_seconds:
            raise BudgetExceeded(f"runtime budget of {config.max_seconds} s exceeded after {stage}")

    scenario = prepare_scenario(config)
    max_order = config.max_order
    result = run_sensing(scenario, max_order, config.workers, config.noise_dbm, config.seed)
    check_budget("simulation")

    if config.threshold is not None:
        threshold = float(config.threshold)
    elif scenario.lots:
        empty = empty_scene_heatmap(scenario, max_order, config.workers, config.noise_dbm, config.seed)
        threshold = calibrate_threshold(empty, scenario.lots, config.calibrate_margin)
    else:
        threshold = 0.0
    scores = score_lots(result.heatmap, scenario.lots)
    report = detect(scores, threshold, scenario.scenario_id, scenario.grid)
    check_budget("detection")

    files: dict[str, bytes] = {}
    files["heatmap.csv"] = artifacts.heatmap_to_csv(result.heatmap).encode()
    pgm, sidecar = artifacts.heatmap_to_pgm(result.heatmap)
    files["heatmap.pgm"] = pgm
    files["heatmap.pgm.txt"] = sidecar.encode()
    files["report.json"] = artifacts.report_to_json(report, scenario.name).encode()
    if config.dump_paths:
        links = {k: list(v.paths) for k, v in result.observed.items()}
        files["paths.json"] = paths_to_json(links).encode()
    if config.dump_cir:
        for (tx_id, rx_id), link in result.observed.items():
            ref = result.reference[(tx_id, rx_id)]
            files[f"cir/{tx_id}_{rx_id}_observed.csv"] = cir_to_csv(link.cir).encode()
            files[f"cir/{tx_id}_{rx_id}_reference.csv"] = cir_to_csv(ref.cir).encode()
    check_budget("serialization")
    return RunOutcome(scenario, result.heatmap, report, files, time.perf_counter() - start)


def write_files(out: Path, files: dict[str, bytes]):
    for rel, data in files.items():
        path = out / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)


def run(config: RunConfig) -> int:
    try:
        outcome = execute(config)
    except (ScenarioError, SensingError, ValueError) as exc:
        print(f"radsense: error: {exc}", file=sys.stderr)
        return 1
    except BudgetExceeded as exc:
        print(f"radsense: {exc}", file=sys.stderr)
        return 2
    if config.out is not None:
        write_files(Path(config.out), outcome.files)
    occupied = [d.id for d in outcome.report.lots if d.occupied]
    log.info("scenario %s: %d lots, occupied: %s (threshold %.4g, %.1f s)",
             outcome.scenario.name or config.scenario, len(outcome.report.lots),
             ", ".join(occupied) or "none", outcome.report.threshold, outcome.elapsed)
    return 0


SUMMARY_COLUMNS = ("run", "name", "scenario", "bandwidth_hz", "node_count", "lot_id", "score",
                   "occupied", "threshold", "lot_contrast", "target_contrast_min",
                   "wall_time_s", "status", "error")


def _summary_rows(index: int, config: RunConfig, outcome: RunOutcome) -> list[dict]:
    s, h = outcome.scenario, outcome.heatmap
    if s.lots:
        in_lots = np.logical_or.reduce([region_mask(s.grid, lot.polygon) for lot in s.lots])
        background = float(h.values[~in_lots].mean()) if (~in_lots).any() else 0.0
    else:
        background = 0.0
    target_contrast = ""
    if s.targets:
        target_contrast = f"{min(footprint_contrast(h, [t.footprint() for t in s.targets], FOOTPRINT_DILATION)):.17g}"
    base = {
        "run": index, "name": config.name, "scenario": config.scenario,
        "bandwidth_hz": f"{s.radio.bandwidth:.17g}", "node_count": len(s.nodes),
        "threshold": f"{outcome.report.threshold:.17g}", "target_contrast_min": target_contrast,
        "wall_time_s": f"{outcome.elapsed:.3f}", "status": "ok", "error": "",
    }
    rows = []
    for d in outcome.report.lots:
        contrast = d.score / background if background > 0 else float("inf")
        rows.append({**base, "lot_id": d.id, "score": f"{d.score:.17g}", "occupied": int(d.occupied),
                     "lot_contrast": f"{contrast:.17g}"})
    if not rows:
        rows.append({**base, "lot_id": "", "score": "", "occupied": "", "lot_contrast": ""})
    return rows


def load_manifest(path: str | Path) -> list[RunConfig]:
    """Sweep manifest: ``{"runs": [{...}, ...]}`` or a bare list of run entries.

    Entry keys mirror :class:`RunConfig`; relative scenario paths resolve
    against the manifest's directory.
    """
    path = Path(path)
    doc = json.loads(path.read_text())
    entries = doc["runs"] if isinstance(doc, dict) else doc
    allowed = {"name", "scenario", "bandwidth", "max_order", "grid_cell", "noise_dbm", "seed",
               "threshold", "calibrate_margin", "workers"}
    configs = []
    for i, e in enumerate(entries):
        extra = set(e) - allowed
        if extra:
            raise ValueError(f"manifest run {i}: unknown key(s) {sorted(extra)}")
        scen = e["scenario"]
        candidate = path.parent / scen
        if candidate.exists():
            scen = str(candidate)
        configs.append(RunConfig(**{**e, "scenario": scen}))
    return configs


def sweep(configs: list[RunConfig], out: str | Path | None = None) -> str:
    """Run every config; returns the CSV summary (also written to ``out/summary.csv``)."""
    if not configs:
        raise ValueError("sweep needs at least one run configuration")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for index, config in enumerate(configs):
        try:
            outcome = execute(replace(config, out=None))
        except Exception as exc:  # recorded, sweep continues
            writer.writerow({"run": index, "name": config.name, "scenario": config.scenario,
                             "status": "error", "error": f"{type(exc).__name__}: {exc}"})
            continue
        if out is not None:
            write_files(Path(out) / f"run{index:03d}", outcome.files)
        writer.writerows(_summary_rows(index, config, outcome))
    text = buf.getvalue()
    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / "summary.csv").write_text(text)
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radsense", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario and write heatmap + report")
    p.add_argument("--scenario", required=True, help="scenario file or bundled scenario name")
    p.add_argument("--out", required=True)
    p.add_argument("--max-order", type=int)
    p.add_argument("--grid-cell", type=float)
    p.add_argument("--noise-dbm", type=float)
    p.add_argument("--seed", type=int, default=0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--threshold", type=float)
    g.add_argument("--calibrate-margin", type=float)
    p.add_argument("--dump-paths", action="store_true")
    p.add_argument("--dump-cir", action="store_true")
    p.add_argument("--max-seconds", type=float)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("sweep", help="run a manifest of configurations and summarize")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "run":
        try:
            config = RunConfig(
                scenario=args.scenario, out=args.out, max_order=args.max_order,
                grid_cell=args.grid_cell, noise_dbm=args.noise_dbm, seed=args.seed,
                threshold=args.threshold, calibrate_margin=args.calibrate_margin,
                dump_paths=args.dump_paths, dump_cir=args.dump_cir,
                max_seconds=args.max_seconds, workers=args.workers,
            )
        except ValueError as exc:
            print(f"radsense: error: {exc}", file=sys.stderr)
            return 1
        return run(config)
    try:
        configs = load_manifest(args.manifest)
        sweep(configs, args.out)
    except (OSError, ValueError, KeyError) as exc:
        print(f"radsense: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
