"""Deterministic intersection-scheduling experiments.

Two models of the same four-way crossing: a grid reservation baseline that
counts conflicting occupancy intervals at crossing cells, and a slot
scheduler that admits speed-banded vehicles into fixed-length moving
containers behind alternating gates. Plus demand patterns, an online
right-turn classifier, and deterministic reporting.
"""

from .baseline import (
    BaselineReport,
    Direction,
    GridConfig,
    Interval,
    MeetingEvent,
    PlacedVehicle,
    detect_conflict,
    meeting_events,
    place_vehicles,
    point_occupation_time,
    propagate_waiting,
    run_baseline,
    time_to_arrive,
)
from .core import (
    InvalidStateError,
    LaneId,
    SeededRng,
    SimClock,
    Vehicle,
    VehicleState,
    mph_to_fps,
    mph_to_fps_truncated,
)
from .flows import (
    PatternKind,
    PatternSpec,
    QueueResult,
    arranged_wait,
    extra_space_pct,
    generate_arrivals,
    waiting_pct,
)
from .prodline import (
    CapacityWindow,
    Decision,
    Feasibility,
    IntersectionConfig,
    LaneConfig,
    RejectReason,
    ScheduleRecord,
    admit,
    average_speed,
    build_demand,
    check_window_feasibility,
    exit_second,
    gate_open,
    run_prodline,
    staying_time,
    transition_speed,
    verify_no_collisions,
)
from .report import ComparisonTable, Model, RunReport, emit_csv, emit_json, emit_schedule_csv, summarize
from .turns import (
    InstanceStore,
    KnnInstance,
    StoreFormatError,
    TurnLabel,
    TurnPredictor,
    euclidean_distance,
    knn_predict,
    load_store,
    seed_instances,
)

__version__ = "0.1.0"
