"""Run summaries and deterministic CSV/JSON serialization.

Outputs carry no timestamps; the seed is the provenance key, so identical
inputs always serialize to identical bytes. Floats are written in shortest
round-trip decimal form.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Iterable

from .baseline import BaselineReport
from .core import _require
from .flows import PatternKind

if TYPE_CHECKING:
    from .prodline import ScheduleRecord


class Model(Enum):
    BASELINE = "baseline"
    PRODLINE = "prodline"


@dataclass(frozen=True)
class RunReport:
    model: Model
    pattern: PatternKind | None
    n_vehicles: int
    admitted: int
    rejected: int
    avg_waiting_s: float
    collisions_per_vehicle: float
    extra_space_pct: float
    seed: int

    def __post_init__(self) -> None:
        _require(self.n_vehicles >= 0 and self.admitted >= 0 and self.rejected >= 0, "counts must be >= 0")
        _require(self.avg_waiting_s >= 0.0, f"avg_waiting_s must be >= 0, got {self.avg_waiting_s}")
        if self.model is Model.PRODLINE:
            _require(
                self.admitted + self.rejected == self.n_vehicles,
                f"admitted {self.admitted} + rejected {self.rejected} != {self.n_vehicles}",
            )
            _require(
                self.collisions_per_vehicle == 0.0,
                f"slot-scheduled runs cannot report collisions, got {self.collisions_per_vehicle}",
            )


def summarize(
    source: "Iterable[ScheduleRecord] | BaselineReport",
    pattern: PatternKind | None = None,
    extra_space_pct: float = 0.0,
    seed: int = 0,
) -> RunReport:
    """Fold per-vehicle records (or a grid-model report) into one RunReport.

    Waiting is averaged over every recorded vehicle; a grid-model report
    passes its aggregates through unchanged.
    """
    if isinstance(source, BaselineReport):
        return RunReport(
            model=Model.BASELINE,
            pattern=pattern,
            n_vehicles=source.n_vehicles,
            admitted=source.n_vehicles,
            rejected=0,
            avg_waiting_s=source.avg_waiting_s,
            collisions_per_vehicle=source.collisions_per_vehicle,
            extra_space_pct=extra_space_pct,
            seed=seed,
        )

    from .prodline import ScheduleRecord

    records = list(source)
    for r in records:
        if not isinstance(r, ScheduleRecord):
            raise ValueError(f"mixed input to summarize: got {type(r).__name__}")
    admitted = sum(1 for r in records if r.admitted)
    n = len(records)
    return RunReport(
        model=Model.PRODLINE,
        pattern=pattern,
        n_vehicles=n,
        admitted=admitted,
        rejected=n - admitted,
        avg_waiting_s=sum(r.waiting_s for r in records) / n if n else 0.0,
        collisions_per_vehicle=0.0,
        extra_space_pct=extra_space_pct,
        seed=seed,
    )


@dataclass
class ComparisonTable:
    rows: list[RunReport] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.rows.sort(key=lambda r: (r.model.value, r.n_vehicles, r.pattern.value if r.pattern else ""))

    def waiting_reduction_by_n(self) -> dict[int, float]:
        """Waiting cut by the slot scheduler vs the grid model, per fleet size
        present in both; 100% means the scheduler eliminated all waiting."""
        base = {r.n_vehicles: r.avg_waiting_s for r in self.rows if r.model is Model.BASELINE}
        prod = {r.n_vehicles: r.avg_waiting_s for r in self.rows if r.model is Model.PRODLINE}
        out: dict[int, float] = {}
        for n in sorted(base.keys() & prod.keys()):
            if base[n] > 0:
                out[n] = (base[n] - prod[n]) / base[n] * 100.0
        return out


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "Yes" if value else "No"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Enum):
        return value.value
    return str(value)


REPORT_COLUMNS = (
    "model",
    "pattern",
    "n_vehicles",
    "admitted",
    "rejected",
    "avg_waiting_s",
    "collisions_per_vehicle",
    "extra_space_pct",
    "seed",
)


def emit_csv(table: ComparisonTable, path: Path | str) -> Path:
    """One row per report, stable column order, deterministic bytes."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for row in table.rows:
            data = asdict(row)
            writer.writerow([_cell(data[col]) for col in REPORT_COLUMNS])
    return path


SCHEDULE_COLUMNS = ("vehicle_id", "lane", "arrive_s", "right_turn", "exit_s")


def emit_schedule_csv(records: "Iterable[ScheduleRecord]", path: Path | str) -> Path:
    """Per-vehicle table: id, lane, arrival, right-turn flag, exit time."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCHEDULE_COLUMNS)
        for r in records:
            writer.writerow(
                [_cell(r.vehicle_id), _cell(r.lane), _cell(r.arrive_s), _cell(r.right_turn), _cell(r.exit_s)]
            )
    return path


def report_to_dict(report: RunReport) -> dict:
    """JSON-ready mapping with keys in the fixed column order."""
    data = asdict(report)
    out = {}
    for col in REPORT_COLUMNS:
        value = data[col]
        out[col] = value.value if isinstance(value, Enum) else value
    return out


def emit_json(payload: dict, path: Path | str) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, indent=2, ensure_ascii=False)
        fh.write("\n")
    return path
