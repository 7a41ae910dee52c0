"""Kinematic drone simulation: fly-to-target, battery, RTK-noised fixes.

The real vehicle's navigation stack is treated as a black box that
"flies to waypoints"; this models exactly that contract. Velocity is
steered toward the target with an acceleration clamp then a speed
clamp, position integrates by explicit Euler, and the commanded speed
falls off as sqrt(2*a*d) near the target so approaches follow a
trapezoidal speed profile without overshoot.

Exactly one simulation loop owns and steps a DroneState; Telemetry
snapshots are immutable values safe to hand to any thread.
"""
import math
from dataclasses import dataclass, replace
from enum import Enum

from radnav.geodesy import GeodeticCoordinate, GeoOrigin, LocalEnu, to_geodetic


class GpsQuality(Enum):
    RTK_FIXED = "RTK_FIXED"
    RTK_FLOAT = "RTK_FLOAT"
    GPS_ONLY = "GPS_ONLY"
    NONE = "NONE"


class FlightMode(Enum):
    GROUNDED = "GROUNDED"
    HOLDING = "HOLDING"
    ENROUTE = "ENROUTE"
    RETURNING = "RETURNING"
    LANDED_FAULT = "LANDED_FAULT"


class NonPositiveDt(ValueError):
    """Step size must lie in (0, 1] seconds."""


@dataclass(frozen=True)
class DroneParams:
    """Vehicle limits and noise model.

    rtk_noise_sigma_m defaults to 0.02 (RTK fixes are good to a few
    centimeters); values above 0.05 leave the RTK regime.
    """

    max_speed_mps: float = 5.0
    max_accel_mps2: float = 2.5
    arrival_radius_m: float = 1.0
    battery_drain_pct_per_s: float = 0.02
    rtk_noise_sigma_m: float = 0.02
    start_position: LocalEnu = LocalEnu(0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("max_speed_mps", "max_accel_mps2", "arrival_radius_m", "battery_drain_pct_per_s"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.rtk_noise_sigma_m < 0.0:
            raise ValueError(f"rtk_noise_sigma_m must be >= 0, got {self.rtk_noise_sigma_m}")


@dataclass(frozen=True)
class DroneState:
    """Simulation truth for the vehicle at one tick."""

    true_position: LocalEnu
    velocity: tuple = (0.0, 0.0, 0.0)
    battery_pct: float = 100.0
    gps_quality: GpsQuality = GpsQuality.RTK_FIXED
    mode: FlightMode = FlightMode.GROUNDED


@dataclass(frozen=True)
class Telemetry:
    """Operator-visible snapshot: noisy position plus status fields."""

    timestamp_s: float
    reported_position: GeodeticCoordinate
    battery_pct: float
    gps_quality: GpsQuality
    mode: FlightMode
    active_waypoint_id: int | None = None


def initial_state(params: DroneParams) -> DroneState:
    return DroneState(true_position=params.start_position)


def _speed(v):
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def step(
    state: DroneState,
    params: DroneParams,
    target: LocalEnu | None,
    dt: float,
    speed_limit_mps: float | None = None,
) -> DroneState:
    """Advance the vehicle one tick toward the target (or to a hover).

    With no target the vehicle decelerates to a hover (mode HOLDING once
    airborne). Battery drains while airborne; at 0% the mode latches to
    LANDED_FAULT and motion stops. speed_limit_mps lowers the cruise
    speed for the current leg (per-waypoint override).
    """
    if not 0.0 < dt <= 1.0:
        raise NonPositiveDt(f"dt must be in (0, 1], got {dt}")

    if state.mode is FlightMode.LANDED_FAULT or state.battery_pct <= 0.0:
        return replace(state, velocity=(0.0, 0.0, 0.0), battery_pct=0.0, mode=FlightMode.LANDED_FAULT)

    airborne = state.mode in (FlightMode.ENROUTE, FlightMode.HOLDING, FlightMode.RETURNING)
    if target is None and not airborne:
        return state  # parked on the ground, nothing to do

    vmax = params.max_speed_mps
    if speed_limit_mps is not None:
        vmax = min(vmax, speed_limit_mps)
    amax = params.max_accel_mps2

    px, py, pz = state.true_position.as_tuple()
    vx, vy, vz = state.velocity

    if target is None:
        desired = (0.0, 0.0, 0.0)
        mode = FlightMode.HOLDING
    else:
        dx = target.east_m - px
        dy = target.north_m - py
        dz = target.up_m - pz
        dist = math.sqrt(dx * dx + dy * dy + dz * dz)
        if dist > 0.0:
            # Braking law: never faster than the speed a full-brake stop
            # at the target allows, never more than one tick of travel.
            cruise = min(vmax, math.sqrt(2.0 * amax * dist), dist / dt)
            desired = (dx / dist * cruise, dy / dist * cruise, dz / dist * cruise)
        else:
            desired = (0.0, 0.0, 0.0)
        mode = FlightMode.ENROUTE

    ax = desired[0] - vx
    ay = desired[1] - vy
    az = desired[2] - vz
    dv = math.sqrt(ax * ax + ay * ay + az * az)
    max_dv = amax * dt
    if dv > max_dv:
        scale = max_dv / dv
        ax *= scale
        ay *= scale
        az *= scale
    vx += ax
    vy += ay
    vz += az
    speed = math.sqrt(vx * vx + vy * vy + vz * vz)
    if speed > params.max_speed_mps:
        scale = params.max_speed_mps / speed
        vx *= scale
        vy *= scale
        vz *= scale

    battery = max(0.0, state.battery_pct - params.battery_drain_pct_per_s * dt)
    if battery <= 0.0:
        return replace(
            state, velocity=(0.0, 0.0, 0.0), battery_pct=0.0, mode=FlightMode.LANDED_FAULT
        )

    return DroneState(
        true_position=LocalEnu(px + vx * dt, py + vy * dt, pz + vz * dt),
        velocity=(vx, vy, vz),
        battery_pct=battery,
        gps_quality=state.gps_quality,
        mode=mode,
    )


def arrived(state: DroneState, params: DroneParams, target: LocalEnu) -> bool:
    """Closed-boundary arrival test: distance <= arrival radius."""
    return state.true_position.distance_to(target) <= params.arrival_radius_m


def emit_telemetry(
    state: DroneState,
    params: DroneParams,
    origin: GeoOrigin,
    rng,
    timestamp_s: float = 0.0,
    active_waypoint_id: int | None = None,
) -> Telemetry:
    """Snapshot the vehicle as the operator sees it.

    The reported position is the true position plus independent
    per-axis gaussian noise of std rtk_noise_sigma_m, converted to
    geodetic. Three normal draws are consumed per call regardless of
    sigma so replay streams stay aligned.
    """
    noise = rng.normal(0.0, params.rtk_noise_sigma_m, 3)
    p = state.true_position
    reported = to_geodetic(
        origin, LocalEnu(p.east_m + noise[0], p.north_m + noise[1], p.up_m + noise[2])
    )
    return Telemetry(
        timestamp_s=timestamp_s,
        reported_position=reported,
        battery_pct=state.battery_pct,
        gps_quality=state.gps_quality,
        mode=state.mode,
        active_waypoint_id=active_waypoint_id,
    )
