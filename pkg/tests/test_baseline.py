"""Grid placement, crossing-point conflicts, and waiting propagation."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from intersched.baseline import (
    BASELINE_SPEED_MPH,
    CELL_FT,
    WAIT_PENALTY_S,
    Direction,
    GridConfig,
    Interval,
    PlacedVehicle,
    apply_conflict_waiting,
    conflict_matrix,
    detect_conflict,
    meeting_events,
    place_vehicles,
    point_occupation_time,
    propagate_waiting,
    run_baseline,
    time_to_arrive,
)
from intersched.core import SeededRng, mph_to_fps, mph_to_fps_truncated

CFG = GridConfig()


class TestGridConfig:
    def test_defaults(self):
        assert CFG.intersection_band == (40, 58)
        assert CFG.feeder_range == (1, 38)
        assert CFG.lanes_per_direction == 19
        assert CFG.capacity_per_side == 722
        assert CFG.feeder_len == 38

    def test_feeder_must_end_before_band(self):
        with pytest.raises(ValueError):
            GridConfig(intersection_band=(30, 48), feeder_range=(1, 38))

    def test_capacity_must_match_geometry(self):
        with pytest.raises(ValueError):
            GridConfig(capacity_per_side=700)

    def test_band_must_match_lane_count(self):
        with pytest.raises(ValueError):
            GridConfig(lanes_per_direction=20)


class TestTiming:
    def test_six_hundred_feet_at_eighty(self):
        assert time_to_arrive(1, 0, mph_to_fps(80.0), cell_ft=600.0) == pytest.approx(
            5.11, abs=0.01
        )

    def test_twenty_five_cells_exact_fps(self):
        t = time_to_arrive(30, 5, mph_to_fps(BASELINE_SPEED_MPH))
        assert t == pytest.approx(4.473869318181818, abs=1e-9)

    def test_twenty_five_cells_truncated_fps(self):
        t = time_to_arrive(30, 5, mph_to_fps_truncated(BASELINE_SPEED_MPH))
        assert t == pytest.approx(4.494297945205479, abs=1e-4)

    def test_zero_distance(self):
        assert time_to_arrive(5, 5, 100.0) == 0.0

    def test_target_behind_current(self):
        with pytest.raises(ValueError):
            time_to_arrive(4, 5, 100.0)

    def test_point_occupation(self):
        assert point_occupation_time(CELL_FT, mph_to_fps_truncated(100.0)) == pytest.approx(
            0.17977, abs=1e-5
        )
        assert point_occupation_time(CELL_FT, mph_to_fps(100.0)) == pytest.approx(
            0.178955, abs=1e-6
        )
        assert point_occupation_time(100.0, 100.0) == 1.0


class TestDetectConflict:
    def test_overlap(self):
        assert detect_conflict(Interval(0.0, 2.0), Interval(1.0, 3.0))

    def test_disjoint(self):
        assert not detect_conflict(Interval(0.0, 1.0), Interval(2.0, 3.0))

    def test_shared_endpoint_is_a_conflict(self):
        # closed intervals: touching counts
        assert detect_conflict(Interval(0.0, 1.0), Interval(1.0, 2.0))

    def test_containment(self):
        assert detect_conflict(Interval(0.0, 10.0), Interval(4.0, 5.0))

    @given(
        st.tuples(st.floats(0, 100), st.floats(0, 100)),
        st.tuples(st.floats(0, 100), st.floats(0, 100)),
    )
    def test_symmetric(self, p, q):
        a = Interval(min(p), max(p))
        b = Interval(min(q), max(q))
        assert detect_conflict(a, b) == detect_conflict(b, a)

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            Interval(2.0, 1.0)
        with pytest.raises(ValueError):
            Interval(float("nan"), 1.0)


class TestPlacement:
    def test_split_and_ranges(self):
        cars = place_vehicles(CFG, 50, SeededRng(7))
        east = [c for c in cars if c.direction is Direction.EAST]
        south = [c for c in cars if c.direction is Direction.SOUTH]
        assert len(east) == len(south) == 25
        assert cars[:25] == east  # east block first
        for c in east:
            assert 1 <= c.x <= 38 and 40 <= c.y <= 58
        for c in south:
            assert 40 <= c.x <= 58 and 1 <= c.y <= 38

    def test_small_fleet_shares_one_lane_per_direction(self):
        cars = place_vehicles(CFG, 50, SeededRng(7))
        east_rows = {c.y for c in cars[:25]}
        south_cols = {c.x for c in cars[25:]}
        assert len(east_rows) == 1
        assert len(south_cols) == 1
        assert [c.x for c in cars[:25]] == list(range(1, 26))
        assert [c.y for c in cars[25:]] == list(range(1, 26))

    def test_second_lane_opens_after_thirty_eight(self):
        cars = place_vehicles(CFG, 100, SeededRng(3))
        east = cars[:50]
        assert len({c.y for c in east[:38]}) == 1
        assert len({c.y for c in east}) == 2

    def test_ids_sequential(self):
        cars = place_vehicles(CFG, 20, SeededRng(0))
        assert [c.id for c in cars] == list(range(20))

    def test_deterministic(self):
        a = place_vehicles(CFG, 200, SeededRng(11))
        b = place_vehicles(CFG, 200, SeededRng(11))
        assert a == b

    def test_full_capacity_unique_positions(self):
        cars = place_vehicles(CFG, 2 * CFG.capacity_per_side, SeededRng(1))
        east = {(c.x, c.y) for c in cars if c.direction is Direction.EAST}
        south = {(c.x, c.y) for c in cars if c.direction is Direction.SOUTH}
        assert len(east) == 722
        assert len(south) == 722

    def test_rejects_odd_or_oversized(self):
        with pytest.raises(ValueError):
            place_vehicles(CFG, 51, SeededRng(0))
        with pytest.raises(ValueError):
            place_vehicles(CFG, 2 * CFG.capacity_per_side + 2, SeededRng(0))

    def test_zero_cars(self):
        assert place_vehicles(CFG, 0, SeededRng(0)) == []


def _east(car_id, x, y):
    return PlacedVehicle(id=car_id, x=x, y=y, direction=Direction.EAST)


def _south(car_id, x, y):
    return PlacedVehicle(id=car_id, x=x, y=y, direction=Direction.SOUTH)


class TestMeetingEvents:
    def test_crossing_point_and_verdicts(self):
        # east car 14 cells from the crossing column, south cars at varying
        # distances from the crossing row
        cars = [_east(0, 30, 45), _south(1, 44, 31), _south(2, 44, 20)]
        events = meeting_events(cars, CFG)
        assert len(events) == 2
        by_b = {ev.car_b: ev for ev in events}
        assert by_b[1].point == (44, 45)
        assert by_b[1].conflict  # both 14 cells out: identical intervals
        assert not by_b[2].conflict  # 25 vs 14 cells: 11 cells apart

    def test_pair_already_past_produces_no_event(self):
        # south car inside the band (y >= 40) no longer meets an east feeder car
        cars = [_east(0, 30, 45), _south(1, 44, 41)]
        assert meeting_events(cars, CFG) == []

    def test_east_car_beyond_the_column_produces_no_event(self):
        cars = [_east(0, 45, 45), _south(1, 44, 20)]
        assert meeting_events(cars, CFG) == []

    def test_placed_fleet_meets_every_cross_pair(self):
        cars = place_vehicles(CFG, 50, SeededRng(2))
        assert len(meeting_events(cars, CFG)) == 25 * 25

    def test_two_cells_apart_never_conflicts(self):
        cars = [_east(0, 30, 45), _south(1, 44, 29)]
        (ev,) = meeting_events(cars, CFG)
        assert not ev.conflict


class TestWaitingPropagation:
    def test_blocked_car_and_trail_charged(self):
        cars = [_east(0, 5, 45), _east(1, 10, 45), _east(2, 15, 45)]
        propagate_waiting(cars, blocked=1)
        assert [c.waiting_s for c in cars] == [WAIT_PENALTY_S, WAIT_PENALTY_S, 0.0]

    def test_other_lanes_untouched(self):
        cars = [_east(0, 5, 45), _east(1, 5, 46)]
        propagate_waiting(cars, blocked=0)
        assert cars[1].waiting_s == 0.0

    def test_south_trail_uses_column(self):
        cars = [_south(0, 44, 5), _south(1, 44, 10), _south(2, 45, 10)]
        propagate_waiting(cars, blocked=1)
        assert [c.waiting_s for c in cars] == [WAIT_PENALTY_S, WAIT_PENALTY_S, 0.0]

    def test_single_car(self):
        cars = [_east(0, 5, 45)]
        propagate_waiting(cars, blocked=0)
        assert cars[0].waiting_s == WAIT_PENALTY_S

    def test_zero_penalty(self):
        cars = [_east(0, 5, 45)]
        propagate_waiting(cars, blocked=0, penalty_s=0.0)
        assert cars[0].waiting_s == 0.0

    def test_unknown_id(self):
        with pytest.raises(LookupError):
            propagate_waiting([_east(0, 5, 45)], blocked=99)

    def test_conflicting_pair_heads_charged_twice(self):
        # direct hit plus self-inclusive propagation = 2x penalty per head
        cars = [_east(0, 30, 45), _south(1, 44, 31)]
        events = meeting_events(cars, CFG)
        apply_conflict_waiting(cars, events)
        assert cars[0].waiting_s == 2 * WAIT_PENALTY_S
        assert cars[1].waiting_s == 2 * WAIT_PENALTY_S

    def test_trailing_car_charged_once_per_conflict(self):
        cars = [_east(0, 30, 45), _east(1, 10, 45), _south(2, 44, 31)]
        events = meeting_events(cars, CFG)
        conflicts = [ev for ev in events if ev.conflict]
        apply_conflict_waiting(cars, events)
        assert cars[1].waiting_s == len(conflicts) * WAIT_PENALTY_S


class TestVectorizedAgreement:
    @pytest.mark.parametrize("seed", [0, 3, 9])
    @pytest.mark.parametrize("compat", [False, True])
    def test_matrix_matches_event_scan(self, seed, compat):
        cars = place_vehicles(CFG, 50, SeededRng(seed))
        east, south = cars[:25], cars[25:]
        mask = conflict_matrix(east, south, CFG, compat_int_fps=compat)
        events = meeting_events(cars, CFG, compat_int_fps=compat)
        assert len(events) == mask.size
        for ev in events:
            i = ev.car_a
            j = ev.car_b - 25
            assert bool(mask[i, j]) == ev.conflict

    @pytest.mark.parametrize("seed", [1, 4])
    def test_run_totals_match_pure_python(self, seed):
        n = 50
        child = SeededRng(seed).spawn(0)
        report = run_baseline(CFG, n, runs=1, rng=SeededRng(seed))

        cars = place_vehicles(CFG, n, child)
        events = meeting_events(cars, CFG)
        apply_conflict_waiting(cars, events)
        n_conflicts = sum(1 for ev in events if ev.conflict)
        total_waiting = sum(c.waiting_s for c in cars)
        # the error count doubles per-direction; apply_conflict_waiting already
        # charges both sides of each event, so its total needs no doubling
        assert report.collisions_per_vehicle == pytest.approx(
            (2 * n_conflicts / 2) / n, abs=1e-12
        )
        assert report.avg_waiting_s == pytest.approx((total_waiting / 2) / n, rel=1e-12)


class TestRunBaseline:
    def test_deterministic(self):
        a = run_baseline(CFG, 50, runs=5, rng=SeededRng(8))
        b = run_baseline(CFG, 50, runs=5, rng=SeededRng(8))
        assert a == b

    def test_fields(self):
        report = run_baseline(CFG, 50, runs=2, rng=SeededRng(0))
        assert report.n_vehicles == 50
        assert report.runs == 2
        assert report.collisions_per_vehicle >= 0.0
        assert report.avg_waiting_s >= 0.0

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            run_baseline(CFG, 51, runs=1, rng=SeededRng(0))
        with pytest.raises(ValueError):
            run_baseline(CFG, 50, runs=0, rng=SeededRng(0))

    def test_congestion_grows_with_fleet_size(self):
        rng = SeededRng(8)
        small = run_baseline(CFG, 50, runs=20, rng=rng.spawn(0))
        large = run_baseline(CFG, 200, runs=20, rng=rng.spawn(1))
        assert small.collisions_per_vehicle < large.collisions_per_vehicle
        assert small.avg_waiting_s < large.avg_waiting_s
