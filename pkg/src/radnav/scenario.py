"""Scenario files: everything a deterministic run needs, in one TOML.

Top-level keys set the clock and cadences; [origin] anchors the local
frame; [drone] mirrors DroneParams; [field] defines the radiation
ground truth; [grid] shapes the fusion voxel grid. An optional
[mission] table pre-loads (and optionally auto-starts) a waypoint plan
so headless runs are fully reproducible without an operator, and
optional [[drone.gps_window]] entries script GPS-quality degradations.

Configs round-trip through plain dicts (to_dict/from_dict) so a run's
log can embed its own configuration for replay.
"""
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from radnav.flight import DroneParams, GpsQuality
from radnav.geodesy import GeodesyError, GeodeticCoordinate, LocalEnu
from radnav.mission import Waypoint
from radnav.radiation import PointSource, RadiationScenario


class ConfigInvalid(Exception):
    """Bad scenario config; the message names the offending field."""

    def __init__(self, path, detail):
        super().__init__(f"{path}: {detail}")
        self.path = path


@dataclass(frozen=True)
class GpsWindow:
    """Scripted GPS-quality degradation over [start_s, end_s)."""

    start_s: float
    end_s: float
    quality: GpsQuality


@dataclass(frozen=True)
class GridConfig:
    resolution_m: float = 2.0
    dims: tuple = (100, 100, 30)
    min_corner: LocalEnu | None = None  # default: centered on origin, floor at 0

    def origin_enu(self) -> LocalEnu:
        if self.min_corner is not None:
            return self.min_corner
        nx, ny, _nz = self.dims
        return LocalEnu(-0.5 * nx * self.resolution_m, -0.5 * ny * self.resolution_m, 0.0)


@dataclass(frozen=True)
class ScenarioConfig:
    origin: GeodeticCoordinate
    name: str = "scenario"
    seed: int = 0
    tick_dt_s: float = 0.1
    telemetry_hz: float = 10.0
    measurement_hz: float = 2.0
    mesh_delta_hz: float = 2.0
    drone: DroneParams = field(default_factory=DroneParams)
    field_model: RadiationScenario = field(default_factory=RadiationScenario)
    grid: GridConfig = field(default_factory=GridConfig)
    gps_windows: tuple = ()
    mission_waypoints: tuple = ()
    autostart: bool = False

    def __post_init__(self):
        if not 0.0 < self.tick_dt_s <= 1.0:
            raise ConfigInvalid("tick_dt_s", f"must be in (0, 1], got {self.tick_dt_s}")
        for name in ("telemetry_hz", "measurement_hz", "mesh_delta_hz"):
            hz = getattr(self, name)
            if not 0.0 < hz <= 1.0 / self.tick_dt_s:
                raise ConfigInvalid(name, f"must be in (0, {1.0 / self.tick_dt_s:g}] at this tick rate, got {hz}")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalid("seed", f"must be a u64, got {self.seed}")

    def interval_ticks(self, hz: float) -> int:
        return max(1, round(1.0 / (hz * self.tick_dt_s)))


def _expect(table, key, types, path, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigInvalid(f"{path}.{key}" if path else key, "missing required key")
        return default
    value = table[key]
    if isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise ConfigInvalid(f"{path}.{key}" if path else key, "expected a number, got a boolean")
    if not isinstance(value, types):
        want = types.__name__ if not isinstance(types, tuple) else "/".join(t.__name__ for t in types)
        raise ConfigInvalid(f"{path}.{key}" if path else key, f"expected {want}, got {type(value).__name__}")
    return value


def _enu_triple(value, path):
    if not isinstance(value, list) or len(value) != 3 or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigInvalid(path, "expected [east, north, up] numbers")
    try:
        return LocalEnu(float(value[0]), float(value[1]), float(value[2]))
    except GeodesyError as exc:
        raise ConfigInvalid(path, str(exc)) from exc


def from_dict(doc: dict) -> ScenarioConfig:
    """Build a validated ScenarioConfig from parsed TOML / JSON data."""
    known = {"name", "seed", "tick_dt_s", "telemetry_hz", "measurement_hz", "mesh_delta_hz",
             "origin", "drone", "field", "grid", "mission"}
    for key in doc:
        if key not in known:
            raise ConfigInvalid(key, "unknown key")

    origin_tbl = _expect(doc, "origin", dict, "", required=True)
    try:
        origin = GeodeticCoordinate(
            float(_expect(origin_tbl, "lat", (int, float), "origin", required=True)),
            float(_expect(origin_tbl, "lon", (int, float), "origin", required=True)),
            float(_expect(origin_tbl, "alt", (int, float), "origin", default=0.0)),
        )
    except GeodesyError as exc:
        raise ConfigInvalid("origin", str(exc)) from exc

    drone_tbl = dict(_expect(doc, "drone", dict, "", default={}))
    windows = []
    for i, w in enumerate(drone_tbl.pop("gps_window", [])):
        try:
            quality = GpsQuality(_expect(w, "quality", str, f"drone.gps_window[{i}]", required=True))
        except ValueError as exc:
            raise ConfigInvalid(f"drone.gps_window[{i}].quality", str(exc)) from exc
        windows.append(
            GpsWindow(
                float(_expect(w, "start_s", (int, float), f"drone.gps_window[{i}]", required=True)),
                float(_expect(w, "end_s", (int, float), f"drone.gps_window[{i}]", required=True)),
                quality,
            )
        )
    if "start_position" in drone_tbl:
        drone_tbl["start_position"] = _enu_triple(drone_tbl["start_position"], "drone.start_position")
    try:
        drone = DroneParams(**{k: (float(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else v)
                               for k, v in drone_tbl.items()})
    except TypeError as exc:
        raise ConfigInvalid("drone", str(exc)) from exc
    except ValueError as exc:
        raise ConfigInvalid("drone", str(exc)) from exc

    field_tbl = _expect(doc, "field", dict, "", default={})
    sources = []
    for i, s in enumerate(field_tbl.get("source", [])):
        pos = LocalEnu(
            float(_expect(s, "east", (int, float), f"field.source[{i}]", required=True)),
            float(_expect(s, "north", (int, float), f"field.source[{i}]", required=True)),
            float(_expect(s, "up", (int, float), f"field.source[{i}]", required=True)),
        )
        try:
            sources.append(
                PointSource(pos, float(_expect(s, "strength", (int, float), f"field.source[{i}]", required=True)))
            )
        except ValueError as exc:
            raise ConfigInvalid(f"field.source[{i}].strength", str(exc)) from exc
    try:
        field_model = RadiationScenario(
            sources=tuple(sources),
            background=float(_expect(field_tbl, "background", (int, float), "field", default=0.0)),
            clamp_epsilon_m=float(_expect(field_tbl, "clamp_epsilon", (int, float), "field", default=0.3)),
        )
    except ValueError as exc:
        raise ConfigInvalid("field", str(exc)) from exc

    grid_tbl = _expect(doc, "grid", dict, "", default={})
    dims_raw = _expect(grid_tbl, "dims", list, "grid", default=[100, 100, 30])
    if len(dims_raw) != 3 or not all(isinstance(d, int) and not isinstance(d, bool) and d > 0 for d in dims_raw):
        raise ConfigInvalid("grid.dims", f"expected three positive ints, got {dims_raw}")
    min_corner = None
    if "min_corner" in grid_tbl:
        min_corner = _enu_triple(grid_tbl["min_corner"], "grid.min_corner")
    resolution = float(_expect(grid_tbl, "resolution", (int, float), "grid", default=2.0))
    if resolution <= 0.0:
        raise ConfigInvalid("grid.resolution", f"must be positive, got {resolution}")
    grid = GridConfig(resolution_m=resolution, dims=tuple(dims_raw), min_corner=min_corner)

    mission_tbl = _expect(doc, "mission", dict, "", default={})
    waypoints = []
    for i, w in enumerate(mission_tbl.get("waypoint", [])):
        path = f"mission.waypoint[{i}]"
        try:
            if "lat" in w:
                position = GeodeticCoordinate(
                    float(_expect(w, "lat", (int, float), path, required=True)),
                    float(_expect(w, "lon", (int, float), path, required=True)),
                    float(_expect(w, "alt", (int, float), path, default=origin.altitude_m)),
                )
            else:
                from radnav.geodesy import GeoOrigin, to_geodetic

                enu = LocalEnu(
                    float(_expect(w, "east", (int, float), path, required=True)),
                    float(_expect(w, "north", (int, float), path, required=True)),
                    float(_expect(w, "up", (int, float), path, required=True)),
                )
                position = to_geodetic(GeoOrigin(origin), enu)
        except GeodesyError as exc:
            raise ConfigInvalid(path, str(exc)) from exc
        speed = _expect(w, "speed_mps", (int, float), path)
        waypoints.append(
            Waypoint(
                id=i + 1,
                position=position,
                hold_time_s=float(_expect(w, "hold_s", (int, float), path, default=0.0)),
                speed_override_mps=float(speed) if speed is not None else None,
            )
        )

    try:
        return ScenarioConfig(
            origin=origin,
            name=str(_expect(doc, "name", str, "", default="scenario")),
            seed=_expect(doc, "seed", int, "", default=0),
            tick_dt_s=float(_expect(doc, "tick_dt_s", (int, float), "", default=0.1)),
            telemetry_hz=float(_expect(doc, "telemetry_hz", (int, float), "", default=10.0)),
            measurement_hz=float(_expect(doc, "measurement_hz", (int, float), "", default=2.0)),
            mesh_delta_hz=float(_expect(doc, "mesh_delta_hz", (int, float), "", default=2.0)),
            drone=drone,
            field_model=field_model,
            grid=grid,
            gps_windows=tuple(windows),
            mission_waypoints=tuple(waypoints),
            autostart=bool(mission_tbl.get("autostart", False)),
        )
    except GeodesyError as exc:
        raise ConfigInvalid("origin", str(exc)) from exc


def load_scenario(path) -> ScenarioConfig:
    """Parse and validate a scenario TOML file."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigInvalid(str(path), "file not found") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid(str(path), f"TOML parse error: {exc}") from exc
    return from_dict(doc)


def to_dict(config: ScenarioConfig) -> dict:
    """Plain-dict form of a config, embeddable in a run log header."""
    doc = {
        "name": config.name,
        "seed": config.seed,
        "tick_dt_s": config.tick_dt_s,
        "telemetry_hz": config.telemetry_hz,
        "measurement_hz": config.measurement_hz,
        "mesh_delta_hz": config.mesh_delta_hz,
        "origin": {
            "lat": config.origin.latitude_deg,
            "lon": config.origin.longitude_deg,
            "alt": config.origin.altitude_m,
        },
        "drone": {
            "max_speed_mps": config.drone.max_speed_mps,
            "max_accel_mps2": config.drone.max_accel_mps2,
            "arrival_radius_m": config.drone.arrival_radius_m,
            "battery_drain_pct_per_s": config.drone.battery_drain_pct_per_s,
            "rtk_noise_sigma_m": config.drone.rtk_noise_sigma_m,
            "start_position": list(config.drone.start_position.as_tuple()),
        },
        "field": {
            "background": config.field_model.background,
            "clamp_epsilon": config.field_model.clamp_epsilon_m,
            "source": [
                {
                    "east": s.position.east_m,
                    "north": s.position.north_m,
                    "up": s.position.up_m,
                    "strength": s.strength,
                }
                for s in config.field_model.sources
            ],
        },
        "grid": {
            "resolution": config.grid.resolution_m,
            "dims": list(config.grid.dims),
            "min_corner": list(config.grid.origin_enu().as_tuple()),
        },
        "mission": {
            "autostart": config.autostart,
            "waypoint": [
                {
                    "lat": w.position.latitude_deg,
                    "lon": w.position.longitude_deg,
                    "alt": w.position.altitude_m,
                    "hold_s": w.hold_time_s,
                    **({"speed_mps": w.speed_override_mps} if w.speed_override_mps is not None else {}),
                }
                for w in config.mission_waypoints
            ],
        },
    }
    if config.gps_windows:
        doc["drone"]["gps_window"] = [
            {"start_s": w.start_s, "end_s": w.end_s, "quality": w.quality.value}
            for w in config.gps_windows
        ]
    return doc


def gps_quality_at(config: ScenarioConfig, t_s: float) -> GpsQuality:
    """Scripted GPS quality at a sim time (last matching window wins)."""
    quality = GpsQuality.RTK_FIXED
    for w in config.gps_windows:
        if w.start_s <= t_s < w.end_s:
            quality = w.quality
    return quality
