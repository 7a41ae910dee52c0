"""Waypoint mission model: ordered plan, execution state machine, edit rules.

Plans and mission states are immutable values; every mutation returns a
new plan with the revision bumped, so the server can atomically swap
revisions and a failed mutation provably leaves the old value
untouched. In flight, only waypoints strictly after the active one may
be added, changed or removed; the active and visited ones are frozen.

The server's single mission loop owns the current revision and applies
operator mutations serially in arrival order.
"""
from dataclasses import dataclass, replace
from enum import Enum

from radnav.geodesy import GeodeticCoordinate, GeoOrigin, LocalEnu, to_local

_HOLD_EPS_S = 1e-9  # absorbs float drift in tick-count * dt arithmetic

_UNSET = object()


class MissionPhase(Enum):
    IDLE = "IDLE"
    READY = "READY"
    ENROUTE = "ENROUTE"
    HOLDING = "HOLDING"
    COMPLETED = "COMPLETED"
    ABORTED = "ABORTED"


class MissionError(Exception):
    """Base class for refused mission operations."""


class EditBehindCursor(MissionError):
    """Edit touches a visited or active waypoint (or inserts before one)."""


class UnknownWaypoint(MissionError):
    pass


class EmptyPlan(MissionError):
    pass


class AlreadyRunning(MissionError):
    pass


class InvalidPosition(MissionError):
    pass


@dataclass(frozen=True)
class Waypoint:
    id: int
    position: GeodeticCoordinate
    hold_time_s: float = 0.0
    speed_override_mps: float | None = None

    def __post_init__(self):
        if self.hold_time_s < 0.0:
            raise InvalidPosition(f"hold time must be >= 0, got {self.hold_time_s}")
        if self.speed_override_mps is not None and not self.speed_override_mps > 0.0:
            raise InvalidPosition(f"speed override must be positive, got {self.speed_override_mps}")


@dataclass(frozen=True)
class MissionPlan:
    """Ordered waypoints; revision increments on every successful mutation."""

    waypoints: tuple = ()
    revision: int = 0

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(self.waypoints))
        ids = [w.id for w in self.waypoints]
        if len(set(ids)) != len(ids):
            raise InvalidPosition(f"duplicate waypoint ids: {ids}")

    def __len__(self):
        return len(self.waypoints)

    def index_of(self, wp_id):
        for i, w in enumerate(self.waypoints):
            if w.id == wp_id:
                return i
        raise UnknownWaypoint(f"no waypoint with id {wp_id}")

    def fresh_id(self):
        return max((w.id for w in self.waypoints), default=0) + 1


@dataclass(frozen=True)
class MissionState:
    """Execution cursor: phase, active index, hold deadline, visited ids."""

    phase: MissionPhase = MissionPhase.IDLE
    active_index: int | None = None
    hold_until_s: float | None = None
    visited: tuple = ()

    @property
    def running(self):
        return self.phase in (MissionPhase.ENROUTE, MissionPhase.HOLDING)


def _edit_floor(state: MissionState) -> int:
    """First plan index that may still be edited or inserted at.

    Everything visited is frozen forever; while running the active
    waypoint is frozen too, so edits must land strictly after it.
    """
    floor = len(state.visited)
    if state.running and state.active_index is not None:
        floor = max(floor, state.active_index + 1)
    return floor


def add_waypoint(
    plan: MissionPlan,
    position: GeodeticCoordinate,
    hold_time_s: float = 0.0,
    insert_index: int | None = None,
    state: MissionState | None = None,
    speed_override_mps: float | None = None,
) -> MissionPlan:
    """Insert a waypoint (appended when insert_index is None).

    While the mission is running the insertion point must be strictly
    after the active index.
    """
    if not isinstance(position, GeodeticCoordinate):
        raise InvalidPosition(f"expected GeodeticCoordinate, got {type(position).__name__}")
    index = len(plan) if insert_index is None else insert_index
    if not 0 <= index <= len(plan):
        raise InvalidPosition(f"insert index {index} outside [0, {len(plan)}]")
    if state is not None and index < _edit_floor(state):
        raise EditBehindCursor(
            f"cannot insert at index {index}, first editable index is {_edit_floor(state)}"
        )
    wp = Waypoint(plan.fresh_id(), position, hold_time_s, speed_override_mps)
    waypoints = plan.waypoints[:index] + (wp,) + plan.waypoints[index:]
    return MissionPlan(waypoints, plan.revision + 1)


def update_waypoint(
    plan: MissionPlan,
    state: MissionState,
    wp_id: int,
    position=_UNSET,
    hold_time_s=_UNSET,
    speed_override_mps=_UNSET,
) -> MissionPlan:
    """Replace fields of a future waypoint; order and id are preserved."""
    index = plan.index_of(wp_id)
    if wp_id in state.visited or index < _edit_floor(state):
        raise EditBehindCursor(f"waypoint {wp_id} is visited or active")
    old = plan.waypoints[index]
    if position is not _UNSET and not isinstance(position, GeodeticCoordinate):
        raise InvalidPosition(f"expected GeodeticCoordinate, got {type(position).__name__}")
    wp = Waypoint(
        old.id,
        old.position if position is _UNSET else position,
        old.hold_time_s if hold_time_s is _UNSET else hold_time_s,
        old.speed_override_mps if speed_override_mps is _UNSET else speed_override_mps,
    )
    waypoints = plan.waypoints[:index] + (wp,) + plan.waypoints[index + 1 :]
    return MissionPlan(waypoints, plan.revision + 1)


def remove_waypoint(plan: MissionPlan, state: MissionState, wp_id: int) -> MissionPlan:
    """Remove a future waypoint; later indices shift down."""
    index = plan.index_of(wp_id)
    if wp_id in state.visited or index < _edit_floor(state):
        raise EditBehindCursor(f"waypoint {wp_id} is visited or active")
    waypoints = plan.waypoints[:index] + plan.waypoints[index + 1 :]
    return MissionPlan(waypoints, plan.revision + 1)


def replace_plan(plan: MissionPlan, state: MissionState, waypoints) -> MissionPlan:
    """Swap in a whole new waypoint list (mission upload); refused in flight."""
    if state.running:
        raise AlreadyRunning(f"cannot replace the plan while {state.phase.value}")
    return MissionPlan(tuple(waypoints), plan.revision + 1)


def start(plan: MissionPlan, state: MissionState) -> MissionState:
    """IDLE/READY -> ENROUTE(0)."""
    if state.phase not in (MissionPhase.IDLE, MissionPhase.READY):
        raise AlreadyRunning(f"cannot start from {state.phase.value}")
    if len(plan) == 0:
        raise EmptyPlan("cannot start an empty plan")
    return MissionState(phase=MissionPhase.ENROUTE, active_index=0, visited=())


def on_arrival(state: MissionState, plan: MissionPlan, now_s: float) -> MissionState:
    """Arrival at the active waypoint: hold there, or advance if hold is 0."""
    if state.phase is not MissionPhase.ENROUTE:
        raise MissionError(f"on_arrival requires ENROUTE, got {state.phase.value}")
    wp = plan.waypoints[state.active_index]
    if wp.hold_time_s > 0.0:
        return replace(state, phase=MissionPhase.HOLDING, hold_until_s=now_s + wp.hold_time_s)
    return _advance(state, plan)


def poll_hold(state: MissionState, plan: MissionPlan, now_s: float) -> MissionState:
    """Resolve an expired hold; no-op in any other phase."""
    if state.phase is MissionPhase.HOLDING and now_s >= state.hold_until_s - _HOLD_EPS_S:
        return _advance(state, plan)
    return state


def _advance(state: MissionState, plan: MissionPlan) -> MissionState:
    visited = state.visited + (plan.waypoints[state.active_index].id,)
    nxt = state.active_index + 1
    if nxt < len(plan):
        return MissionState(phase=MissionPhase.ENROUTE, active_index=nxt, visited=visited)
    return MissionState(phase=MissionPhase.COMPLETED, active_index=None, visited=visited)


def abort(state: MissionState) -> MissionState:
    """Any phase -> ABORTED (idempotent); the flight target is cleared."""
    return MissionState(phase=MissionPhase.ABORTED, active_index=None, visited=state.visited)


def active_waypoint(plan: MissionPlan, state: MissionState) -> Waypoint | None:
    if state.running and state.active_index is not None and state.active_index < len(plan):
        return plan.waypoints[state.active_index]
    return None


def interpolate_path(plan: MissionPlan, origin: GeoOrigin, samples_per_segment: int):
    """Sampled straight-line ENU polyline through the plan's waypoints.

    Each segment carries samples_per_segment uniformly spaced points;
    interior waypoints are not duplicated. Endpoints coincide exactly
    with to_local of the waypoints.
    """
    if len(plan) == 0:
        raise EmptyPlan("cannot interpolate an empty plan")
    if samples_per_segment < 2:
        raise ValueError(f"samples_per_segment must be >= 2, got {samples_per_segment}")
    anchors = [to_local(origin, w.position) for w in plan.waypoints]
    if len(anchors) == 1:
        return anchors
    points = [anchors[0]]
    for a, b in zip(anchors, anchors[1:]):
        for k in range(1, samples_per_segment):
            t = k / (samples_per_segment - 1)
            points.append(
                LocalEnu(
                    a.east_m * (1.0 - t) + b.east_m * t,
                    a.north_m * (1.0 - t) + b.north_m * t,
                    a.up_m * (1.0 - t) + b.up_m * t,
                )
            )
    return points
