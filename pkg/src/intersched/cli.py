"""Command-line harness: every experiment behind one executable.

Subcommands: `baseline` (grid reservation model), `prodline` (slot
scheduler), `flow` (demand patterns and the arranged queue), `knn` (turn
classifier store tools), and `reproduce` (the full sweep). Every run is a
pure function of its seed; bare invocations use DEFAULT_SEED so they are
reproducible too. INTERSCHED_OUT_DIR overrides the default output directory.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .baseline import GridConfig, run_baseline
from .core import LaneId, SeededRng
from .flows import (
    LANE_CAPACITY,
    PatternKind,
    PatternSpec,
    QUEUE_SLOT_S,
    arranged_wait,
    extra_space_pct,
    generate_arrivals,
    waiting_pct,
)
from .prodline import (
    IntersectionConfig,
    LaneConfig,
    ScheduleRecord,
    _open_seconds,
    build_demand,
    run_prodline,
)
from .report import (
    ComparisonTable,
    emit_csv,
    emit_json,
    emit_schedule_csv,
    report_to_dict,
    summarize,
)
from .turns import InstanceStore, TurnPredictor, knn_predict, load_store, seed_instances

DEFAULT_SEED = 42
OUT_DIR_ENV = "INTERSCHED_OUT_DIR"

_EPILOG = """\
model constants:
  26.2467   container/cell length in feet
  60        containers per lane, and seconds per window
  60-65     admission speed band in mph, averaged to 62.5
  91.66667  62.5 mph in feet per second (5-decimal form the timings use)
  5.58      grid-model conflict penalty in seconds
  5.5880    arranged-queue cost per displaced slot in seconds
"""

BASELINE_COLUMNS = ("n_vehicles", "collisions_per_vehicle", "avg_waiting_s")
BASELINE_SWEEP_NS = (50, 100, 150, 200, 250, 300)
BASELINE_SWEEP_RUNS = 100


def _default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "."))


def _fmt(value: float) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def load_config(path: Path | str | None) -> IntersectionConfig:
    """Build an IntersectionConfig from an INI file; every key is optional
    and defaults to the standard four-lane setup."""
    if path is None:
        return IntersectionConfig.default()
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(f"config file not found: {path}")

    def lane_from(section_name: str, lane_id: LaneId, parity: int) -> LaneConfig:
        defaults = LaneConfig(lane_id, phase_parity=parity)
        if not parser.has_section(section_name):
            return defaults
        section = parser[section_name]
        known = {"min_speed", "max_speed", "num_spots", "spot_length_ft"}
        unknown = set(section) - known
        if unknown:
            raise ValueError(f"[{section_name}] has unknown keys: {sorted(unknown)}")
        return LaneConfig(
            lane_id,
            min_speed=section.getfloat("min_speed", defaults.min_speed),
            max_speed=section.getfloat("max_speed", defaults.max_speed),
            phase_parity=parity,
            num_spots=section.getint("num_spots", defaults.num_spots),
            spot_length_ft=section.getfloat("spot_length_ft", defaults.spot_length_ft),
        )

    run_seconds = 60
    exit_speed = None
    next_entry_band = None
    if parser.has_section("intersection"):
        section = parser["intersection"]
        known = {"run_seconds", "exit_speed", "next_entry_min", "next_entry_max"}
        unknown = set(section) - known
        if unknown:
            raise ValueError(f"[intersection] has unknown keys: {sorted(unknown)}")
        run_seconds = section.getint("run_seconds", 60)
        exit_speed = section.getfloat("exit_speed", None)
        lo = section.getfloat("next_entry_min", None)
        hi = section.getfloat("next_entry_max", None)
        if (lo is None) != (hi is None):
            raise ValueError("next_entry_min and next_entry_max must be given together")
        if lo is not None:
            next_entry_band = (lo, hi)

    lanes = (
        lane_from("lane.A1", LaneId.A1, 0),
        lane_from("lane.A2", LaneId.A2, 0),
        lane_from("lane.B1", LaneId.B1, 1),
        lane_from("lane.B2", LaneId.B2, 1),
    )
    kwargs = dict(lanes=lanes, run_seconds=run_seconds, next_entry_band=next_entry_band)
    if exit_speed is not None:
        kwargs["exit_speed"] = exit_speed
    return IntersectionConfig(**kwargs)


def _cmd_baseline(args: argparse.Namespace) -> int:
    report = run_baseline(GridConfig(), args.vehicles, args.runs, SeededRng(args.seed), args.compat_int_fps)
    row = [str(report.n_vehicles), _fmt(report.collisions_per_vehicle), _fmt(report.avg_waiting_s)]
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(BASELINE_COLUMNS)
            writer.writerow(row)
        print(args.out)
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(BASELINE_COLUMNS)
        writer.writerow(row)
    return 0


def _prodline_artifacts(kind: PatternKind, seed: int, cfg: IntersectionConfig, rng: SeededRng):
    """One full scheduler run for a pattern: records, summary, predictor."""
    demand = build_demand(cfg, kind, rng)
    schedule = {lane_id: d.scheduled for lane_id, d in demand.items()}
    predictor = TurnPredictor()
    records, _ = run_prodline(cfg, schedule, predictor, rng, pattern=kind)

    for d in demand.values():
        for v in d.overflow:
            records.append(
                ScheduleRecord(
                    vehicle_id=v.id, lane=v.lane, arrive_s=v.arrival_s, right_turn=None,
                    assigned_speed=None, exit_s=None, admitted=False,
                )
            )
    total_requests = sum(d.requests for d in demand.values())
    total_slots = sum(len(_open_seconds(lane, cfg.run_seconds)) for lane in cfg.lanes)
    extra = extra_space_pct(kind, n_requests=total_requests, capacity=total_slots)
    report = summarize(records, pattern=kind, extra_space_pct=extra, seed=seed)
    return records, report, predictor


def _cmd_prodline(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    kind = PatternKind(args.pattern)
    out_dir = Path(args.out_dir) if args.out_dir else _default_out_dir()
    out_dir.mkdir(parents=True, exist_ok=True)

    records, report, _ = _prodline_artifacts(kind, args.seed, cfg, SeededRng(args.seed))
    vehicles_path = emit_schedule_csv(records, out_dir / f"prodline_{kind.value}_vehicles.csv")
    summary_path = emit_json(report_to_dict(report), out_dir / f"prodline_{kind.value}_summary.json")
    print(vehicles_path)
    print(summary_path)
    return 0


def _cmd_flow(args: argparse.Namespace) -> int:
    kind = PatternKind(args.pattern)
    spec = PatternSpec(kind, horizon_slots=args.slots, take_first=args.take)
    arrivals = generate_arrivals(spec, SeededRng(args.seed))

    payload: dict = {"pattern": kind.value, "seed": args.seed, "arrivals": arrivals}
    if kind is PatternKind.WORST:
        # duplicate arrival slots: the arranged-queue model does not apply
        payload["per_vehicle_wait_s"] = None
        payload["avg_wait_s"] = None
    else:
        result = arranged_wait(arrivals, min(args.take, len(arrivals)), QUEUE_SLOT_S)
        payload["per_vehicle_wait_s"] = result.per_vehicle_wait_s
        payload["avg_wait_s"] = result.avg_wait_s
    payload["extra_space_pct"] = extra_space_pct(kind, n_requests=len(arrivals))

    if args.out:
        emit_json(payload, args.out)
        print(args.out)
    else:
        json.dump(payload, sys.stdout, indent=2)
        print()
    return 0


def _store_paths(store_dir: Path) -> tuple[Path, Path]:
    return store_dir / "features.txt", store_dir / "labels.txt"


def _cmd_knn(args: argparse.Namespace) -> int:
    store_dir = Path(args.store)
    features_path, labels_path = _store_paths(store_dir)
    if args.knn_action == "init":
        store_dir.mkdir(parents=True, exist_ok=True)
        store = InstanceStore(seed_instances())
        store.save(features_path, labels_path)
        print(features_path)
        print(labels_path)
        return 0
    store = load_store(features_path, labels_path)
    label = knn_predict((args.day, args.hour, args.event), store, args.k, SeededRng(args.seed))
    print(label.value)
    return 0


def _grid_lines(store: InstanceStore, skip: int) -> list[str]:
    """Lay the labels appended after `skip` out as rows of ten symbols."""
    symbols = [inst.label.value for inst in store.instances[skip:]]
    return [" ".join(symbols[i : i + 10]) for i in range(0, len(symbols), 10)]


def reproduce_all(seed: int, out_dir: Path) -> list[Path]:
    """Every experiment, one output tree; byte-identical for a given seed."""
    out_dir.mkdir(parents=True, exist_ok=True)
    master = SeededRng(seed)
    written: list[Path] = []
    reports = []

    sweep_path = out_dir / "baseline_sweep.csv"
    with open(sweep_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BASELINE_COLUMNS)
        for i, n in enumerate(BASELINE_SWEEP_NS):
            report = run_baseline(GridConfig(), n, BASELINE_SWEEP_RUNS, master.spawn(i))
            writer.writerow([str(n), _fmt(report.collisions_per_vehicle), _fmt(report.avg_waiting_s)])
            reports.append(summarize(report, seed=seed))
    written.append(sweep_path)

    cfg = IntersectionConfig.default()
    grids: dict[str, list[str]] = {}
    for j, kind in enumerate(PatternKind):
        records, report, predictor = _prodline_artifacts(kind, seed, cfg, master.spawn(10 + j))
        written.append(emit_schedule_csv(records, out_dir / f"prodline_{kind.value}_vehicles.csv"))
        written.append(emit_json(report_to_dict(report), out_dir / f"prodline_{kind.value}_summary.json"))
        reports.append(report)
        if kind is PatternKind.AVERAGE:
            seeded = len(seed_instances())
            grids["a"] = _grid_lines(predictor.stores["A"], seeded)
            grids["b"] = _grid_lines(predictor.stores["B"], seeded)

    for group, lines in grids.items():
        grid_path = out_dir / f"turn_grid_{group}.txt"
        grid_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(grid_path)

    queue_spec = PatternSpec(PatternKind.RANDOM)
    arrivals = generate_arrivals(queue_spec, master.spawn(20))
    queue = arranged_wait(arrivals, queue_spec.take_first, queue_spec.slot_seconds)
    written.append(
        emit_json(
            {
                "pattern": "random",
                "seed": seed,
                "arrivals": queue.arrivals,
                "per_vehicle_wait_s": queue.per_vehicle_wait_s,
                "avg_wait_s": queue.avg_wait_s,
                "extra_space_pct": waiting_pct(len(arrivals), LANE_CAPACITY),
            },
            out_dir / "flow_random_queue.json",
        )
    )

    written.append(emit_csv(ComparisonTable(reports), out_dir / "comparison.csv"))
    return written


def _cmd_reproduce(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir) if args.out_dir else _default_out_dir() / "reproduction"
    for path in reproduce_all(args.seed, out_dir):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intersched",
        description="Deterministic intersection-scheduling experiments.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log admissions and exits")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("baseline", help="grid reservation model: collisions and waiting")
    p.add_argument("--vehicles", type=int, required=True, help="fleet size (even)")
    p.add_argument("--runs", type=int, default=100, help="seeded runs to average over")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--compat-int-fps", action="store_true",
                   help="integer-truncated mph->fps (100 mph -> 146 fps)")
    p.add_argument("--out", type=Path, default=None, help="write the CSV here instead of stdout")
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("prodline", help="slot scheduler: one 60 s window")
    p.add_argument("--pattern", choices=[k.value for k in PatternKind], default=PatternKind.AVERAGE.value)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--config", type=Path, default=None, help="INI config (sections [intersection], [lane.A1]..)")
    p.add_argument("--out-dir", type=Path, default=None)
    p.set_defaults(func=_cmd_prodline)

    p = sub.add_parser("flow", help="demand patterns and the arranged queue")
    p.add_argument("--pattern", choices=[k.value for k in PatternKind], required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--slots", type=int, default=720, help="random-pattern horizon in slots")
    p.add_argument("--take", type=int, default=60, help="vehicles measured from the front of the queue")
    p.add_argument("--out", type=Path, default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser("knn", help="right-turn classifier store tools")
    knn_sub = p.add_subparsers(dest="knn_action", required=True)
    q = knn_sub.add_parser("init", help="write the bootstrap store")
    q.add_argument("--store", type=Path, required=True, help="store directory (features.txt + labels.txt)")
    q.set_defaults(func=_cmd_knn)
    q = knn_sub.add_parser("predict", help="predict one (day, hour, event) query")
    q.add_argument("--day", type=int, required=True)
    q.add_argument("--hour", type=int, required=True)
    q.add_argument("--event", type=int, required=True)
    q.add_argument("--store", type=Path, required=True, help="store directory (features.txt + labels.txt)")
    q.add_argument("--k", type=int, default=3)
    q.add_argument("--seed", type=int, default=DEFAULT_SEED)
    q.set_defaults(func=_cmd_knn)

    p = sub.add_parser("reproduce", help="run every experiment into one output tree")
    p.add_argument("--all", action="store_true", help="run the complete sweep (the default and only mode)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out-dir", type=Path, default=None)
    p.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, LookupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
