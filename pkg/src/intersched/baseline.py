"""Reservation-style baseline: two crossing flows on a cell grid.

Half the cars head east through a feeder (x 1..38) toward one of 19 crossing
rows (y 40..58); the other half head south with the axes swapped. Every
east/south pair shares exactly one crossing cell. A pair conflicts when their
closed occupancy intervals at that cell overlap, which charges a 5.58 s
penalty to the blocked car and ripples the same penalty back through its
lane. Collision and waiting figures are averaged over many seeded runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    SeededRng,
    SpeedFps,
    SpeedMph,
    _require,
    mph_to_fps,
    mph_to_fps_truncated,
)

CELL_FT = 26.2467
WAIT_PENALTY_S = 5.58
BASELINE_SPEED_MPH = 100.0


class Direction(Enum):
    EAST = 0  # moves along +x, crosses the vertical band
    SOUTH = 1  # moves along +y, crosses the horizontal band


@dataclass
class PlacedVehicle:
    """A grid car: feeder position, travel direction, accumulated waiting."""

    id: int
    x: int
    y: int
    direction: Direction
    speed_mph: SpeedMph = BASELINE_SPEED_MPH
    waiting_s: float = 0.0


@dataclass(frozen=True)
class GridConfig:
    width: int = 100
    height: int = 100
    cell_ft: float = CELL_FT
    intersection_band: tuple[int, int] = (40, 58)
    feeder_range: tuple[int, int] = (1, 38)
    lanes_per_direction: int = 19
    capacity_per_side: int = 722

    def __post_init__(self) -> None:
        _require(self.width > 0 and self.height > 0, "grid dimensions must be positive")
        _require(self.cell_ft > 0, f"cell_ft must be > 0, got {self.cell_ft}")
        band_lo, band_hi = self.intersection_band
        feed_lo, feed_hi = self.feeder_range
        _require(band_lo <= band_hi, f"bad band {self.intersection_band}")
        _require(feed_lo <= feed_hi, f"bad feeder range {self.feeder_range}")
        # feeders must end strictly before the crossing band begins
        _require(feed_hi < band_lo, f"feeder {self.feeder_range} overlaps band {self.intersection_band}")
        _require(band_hi < self.width and band_hi < self.height, "band exceeds the grid")
        _require(
            band_hi - band_lo + 1 == self.lanes_per_direction,
            f"band holds {band_hi - band_lo + 1} lanes, config says {self.lanes_per_direction}",
        )
        _require(
            self.lanes_per_direction * (feed_hi - feed_lo + 1) == self.capacity_per_side,
            f"{self.lanes_per_direction} lanes x {feed_hi - feed_lo + 1} cells != {self.capacity_per_side}",
        )

    @property
    def feeder_len(self) -> int:
        return self.feeder_range[1] - self.feeder_range[0] + 1


@dataclass(frozen=True)
class Interval:
    """Closed occupancy interval [arrive, leave] at a crossing cell."""

    arrive: float
    leave: float

    def __post_init__(self) -> None:
        _require(
            math.isfinite(self.arrive) and math.isfinite(self.leave) and self.arrive <= self.leave,
            f"malformed interval [{self.arrive}, {self.leave}]",
        )


@dataclass(frozen=True)
class MeetingEvent:
    """One cross-direction pair at its shared crossing cell."""

    car_a: int
    car_b: int
    point: tuple[int, int]
    arrive_a: float
    leave_a: float
    arrive_b: float
    leave_b: float
    conflict: bool


@dataclass(frozen=True)
class BaselineReport:
    n_vehicles: int
    collisions_per_vehicle: float
    avg_waiting_s: float
    runs: int


def time_to_arrive(target_cell: float, current_cell: float, speed: SpeedFps, cell_ft: float = CELL_FT) -> float:
    """Seconds to cover (target - current) cells at `speed` feet per second."""
    _require(target_cell >= current_cell, f"target {target_cell} is behind current {current_cell}")
    _require(speed > 0, f"speed must be > 0, got {speed}")
    return (target_cell - current_cell) * cell_ft / speed


def point_occupation_time(cell_ft: float, speed: SpeedFps) -> float:
    """How long one cell stays occupied while crossed at `speed`."""
    _require(cell_ft > 0, f"cell_ft must be > 0, got {cell_ft}")
    _require(speed > 0, f"speed must be > 0, got {speed}")
    return cell_ft / speed


def detect_conflict(a: Interval, b: Interval) -> bool:
    """Closed-interval overlap; a shared endpoint counts as a conflict."""
    return not (a.arrive > b.leave or a.leave < b.arrive)


def _car_fps(car: PlacedVehicle, compat_int_fps: bool) -> SpeedFps:
    if compat_int_fps:
        return mph_to_fps_truncated(car.speed_mph)
    return mph_to_fps(car.speed_mph)


def place_vehicles(cfg: GridConfig, n: int, rng: SeededRng) -> list[PlacedVehicle]:
    """Drop n cars on the grid, half east-bound and half south-bound.

    Within each direction the feeder coordinate runs 1..38 sequentially; the
    cross coordinate (the lane) is drawn from a shuffled copy of the band, a
    new lane starting only once the previous one is full. Lanes therefore
    fill one at a time, in random order.
    """
    _require(n >= 0 and n % 2 == 0, f"n must be even and >= 0, got {n}")
    _require(n <= 2 * cfg.capacity_per_side, f"n={n} exceeds capacity {2 * cfg.capacity_per_side}")

    feed_lo, _ = cfg.feeder_range
    band = list(range(cfg.intersection_band[0], cfg.intersection_band[1] + 1))
    east_rows = band.copy()
    rng.shuffle(east_rows)
    south_cols = band.copy()
    rng.shuffle(south_cols)

    cars: list[PlacedVehicle] = []
    for i in range(n // 2):
        cars.append(
            PlacedVehicle(
                id=i,
                x=feed_lo + i % cfg.feeder_len,
                y=east_rows[i // cfg.feeder_len],
                direction=Direction.EAST,
            )
        )
    last_lane = cfg.lanes_per_direction - 1
    for j in range(n // 2):
        cars.append(
            PlacedVehicle(
                id=n // 2 + j,
                x=south_cols[min(j // cfg.feeder_len, last_lane)],
                y=feed_lo + j % cfg.feeder_len,
                direction=Direction.SOUTH,
            )
        )
    return cars


def meeting_events(
    cars: list[PlacedVehicle], cfg: GridConfig, compat_int_fps: bool = False
) -> list[MeetingEvent]:
    """Enumerate every east/south pair's crossing cell with both occupancy
    intervals and the conflict verdict.

    An east car at (w, li) meets a south car at column sx when w < sx with
    sx inside the band and the south car still in its feeder (sy <= band
    start - 1); mirrored for the south car's approach to row li. Under the
    placement geometry the predicate holds for every cross pair.
    """
    band_lo = cfg.intersection_band[0]
    east = [c for c in cars if c.direction is Direction.EAST]
    south = [c for c in cars if c.direction is Direction.SOUTH]
    events: list[MeetingEvent] = []
    for a in east:
        fps_a = _car_fps(a, compat_int_fps)
        occ_a = point_occupation_time(cfg.cell_ft, fps_a)
        for b in south:
            if not (a.x < b.x and b.x >= band_lo and b.y <= band_lo - 1):
                continue
            if not (b.y < a.y and a.y >= band_lo and b.x >= band_lo - 1):
                continue
            fps_b = _car_fps(b, compat_int_fps)
            arrive_a = time_to_arrive(b.x, a.x, fps_a, cfg.cell_ft)
            arrive_b = time_to_arrive(a.y, b.y, fps_b, cfg.cell_ft)
            leave_a = arrive_a + occ_a
            leave_b = arrive_b + point_occupation_time(cfg.cell_ft, fps_b)
            events.append(
                MeetingEvent(
                    car_a=a.id,
                    car_b=b.id,
                    point=(b.x, a.y),
                    arrive_a=arrive_a,
                    leave_a=leave_a,
                    arrive_b=arrive_b,
                    leave_b=leave_b,
                    conflict=detect_conflict(Interval(arrive_a, leave_a), Interval(arrive_b, leave_b)),
                )
            )
    return events


def propagate_waiting(
    cars: list[PlacedVehicle], blocked: int, penalty_s: float = WAIT_PENALTY_S
) -> list[PlacedVehicle]:
    """Charge the blocked car and everything at-or-behind it in its lane.

    East lanes share a y and trail toward smaller x; south lanes share an x
    and trail toward smaller y. The blocked car itself is charged once.
    """
    _require(penalty_s >= 0, f"penalty_s must be >= 0, got {penalty_s}")
    by_id = {c.id: c for c in cars}
    if blocked not in by_id:
        raise LookupError(f"no vehicle with id {blocked}")
    head = by_id[blocked]
    for c in cars:
        if head.direction is Direction.EAST:
            trailing = c.direction is Direction.EAST and c.y == head.y and c.x <= head.x
        else:
            trailing = c.direction is Direction.SOUTH and c.x == head.x and c.y <= head.y
        if trailing:
            c.waiting_s += penalty_s
    return cars


def apply_conflict_waiting(
    cars: list[PlacedVehicle], events: list[MeetingEvent], penalty_s: float = WAIT_PENALTY_S
) -> None:
    """Charge both sides of every conflicting pair.

    Each conflict is scanned once per direction: the car gets a direct
    penalty and then its whole lane segment (itself included, so the blocked
    car is hit twice) gets the penalty via propagation.
    """
    by_id = {c.id: c for c in cars}
    for ev in events:
        if not ev.conflict:
            continue
        for blocked in (ev.car_a, ev.car_b):
            by_id[blocked].waiting_s += penalty_s
            propagate_waiting(cars, blocked, penalty_s)


def conflict_matrix(
    east: list[PlacedVehicle], south: list[PlacedVehicle], cfg: GridConfig, compat_int_fps: bool = False
) -> np.ndarray:
    """Boolean conflict verdicts for every (east, south) pair, vectorized.

    Same arithmetic as meeting_events/detect_conflict, evaluated on arrays;
    the pure-Python route stays available as an independent cross-check.
    """
    ex = np.array([c.x for c in east], dtype=np.float64)
    ey = np.array([c.y for c in east], dtype=np.float64)
    efps = np.array([_car_fps(c, compat_int_fps) for c in east])
    sx = np.array([c.x for c in south], dtype=np.float64)
    sy = np.array([c.y for c in south], dtype=np.float64)
    sfps = np.array([_car_fps(c, compat_int_fps) for c in south])

    arrive_e = (sx[None, :] - ex[:, None]) * cfg.cell_ft / efps[:, None]
    arrive_s = (ey[:, None] - sy[None, :]) * cfg.cell_ft / sfps[None, :]
    leave_e = arrive_e + cfg.cell_ft / efps[:, None]
    leave_s = arrive_s + cfg.cell_ft / sfps[None, :]
    return ~((arrive_e > leave_s) | (leave_e < arrive_s))


def _run_single(cfg: GridConfig, n: int, rng: SeededRng, compat_int_fps: bool) -> tuple[int, float]:
    """One seeded run: (raw error count, total accumulated waiting)."""
    cars = place_vehicles(cfg, n, rng)
    east = cars[: n // 2]
    south = cars[n // 2 :]
    if not east or not south:
        return 0, 0.0

    mask = conflict_matrix(east, south, cfg, compat_int_fps)
    ex = np.array([c.x for c in east])
    ey = np.array([c.y for c in east])
    sx = np.array([c.x for c in south])
    sy = np.array([c.y for c in south])
    # cars at-or-behind each car in its own lane (the car itself included)
    behind_e = ((ey[None, :] == ey[:, None]) & (ex[None, :] <= ex[:, None])).sum(axis=1)
    behind_s = ((sx[None, :] == sx[:, None]) & (sy[None, :] <= sy[:, None])).sum(axis=1)

    conflicts_e = mask.sum(axis=1)  # conflicts seen from each east car
    conflicts_s = mask.sum(axis=0)
    errors = 2 * int(mask.sum())  # every pair is scanned once per direction
    total_waiting = WAIT_PENALTY_S * (
        float(conflicts_e @ (1 + behind_e)) + float(conflicts_s @ (1 + behind_s))
    )
    return errors, total_waiting


def run_baseline(
    cfg: GridConfig, n_vehicles: int, runs: int, rng: SeededRng, compat_int_fps: bool = False
) -> BaselineReport:
    """Average collision and waiting figures over `runs` independent runs.

    Every scan counts each conflicting pair twice (once per direction), so
    both reported figures divide the raw totals by 2 before the per-vehicle
    normalization.
    """
    _require(n_vehicles > 0 and n_vehicles % 2 == 0, f"n_vehicles must be even and > 0, got {n_vehicles}")
    _require(runs >= 1, f"runs must be >= 1, got {runs}")
    collision_sum = 0.0
    waiting_sum = 0.0
    for run_index in range(runs):
        errors, total_waiting = _run_single(cfg, n_vehicles, rng.spawn(run_index), compat_int_fps)
        collision_sum += (errors / 2) / n_vehicles
        waiting_sum += (total_waiting / 2) / n_vehicles
    return BaselineReport(
        n_vehicles=n_vehicles,
        collisions_per_vehicle=collision_sum / runs,
        avg_waiting_s=waiting_sum / runs,
        runs=runs,
    )
