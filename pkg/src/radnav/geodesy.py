"""WGS84 geodetic <-> local east-north-up conversions.

Waypoints are placed in a local scene frame but flown as GPS targets;
this module is the bridge. The local frame is an ENU tangent plane
anchored at a mission origin, reached through ECEF (no flat-earth
shortcuts), which keeps centimeter agreement with RTK fixes at
kilometer scales. A 100 km range guard fails loudly where the tangent
plane would start to distort.

All values are immutable and all functions pure; safe to call from any
thread.
"""
import math
from dataclasses import dataclass, field

from radnav._core import kernels

WGS84_A = kernels.WGS84_A
WGS84_F = kernels.WGS84_F
EARTH_MEAN_RADIUS_M = kernels.EARTH_MEAN_RADIUS_M

#: Beyond this ground range the tangent-plane approximation degrades
#: quadratically; conversions refuse rather than silently distort.
MAX_TANGENT_RANGE_M = 100_000.0


class GeodesyError(Exception):
    """Base class for coordinate-conversion failures."""


class InvalidCoordinate(GeodesyError):
    """Non-finite or out-of-range coordinate component."""


class OutOfTangentRange(GeodesyError):
    """Point too far from the mission origin for the local frame."""


def _require_finite(name, *values):
    for v in values:
        if not math.isfinite(v):
            raise InvalidCoordinate(f"{name} component is not finite: {v!r}")


@dataclass(frozen=True)
class GeodeticCoordinate:
    """WGS84 position: decimal degrees plus ellipsoidal height in meters.

    Longitude is normalized to [-180, 180) on construction.
    """

    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self):
        _require_finite("geodetic", self.latitude_deg, self.longitude_deg, self.altitude_m)
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise InvalidCoordinate(f"latitude {self.latitude_deg} outside [-90, 90]")
        lon = ((self.longitude_deg + 180.0) % 360.0) - 180.0
        object.__setattr__(self, "longitude_deg", lon)


@dataclass(frozen=True)
class LocalEnu:
    """East-north-up offset from the mission origin, meters."""

    east_m: float
    north_m: float
    up_m: float

    def __post_init__(self):
        _require_finite("ENU", self.east_m, self.north_m, self.up_m)
        if self.norm() >= MAX_TANGENT_RANGE_M:
            raise OutOfTangentRange(
                f"ENU offset {self.norm():.0f} m exceeds the {MAX_TANGENT_RANGE_M:.0f} m guard"
            )

    def norm(self):
        return math.sqrt(self.east_m ** 2 + self.north_m ** 2 + self.up_m ** 2)

    def distance_to(self, other):
        return math.sqrt(
            (self.east_m - other.east_m) ** 2
            + (self.north_m - other.north_m) ** 2
            + (self.up_m - other.up_m) ** 2
        )

    def as_tuple(self):
        return (self.east_m, self.north_m, self.up_m)


@dataclass(frozen=True)
class GeoOrigin:
    """Mission origin with its cached ECEF position and ENU rotation basis.

    The cached frame is a 12-tuple (ECEF origin + east/north/up rows)
    consumed directly by the kernels; rows are orthonormal by
    construction.
    """

    origin: GeodeticCoordinate
    frame: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "frame",
            kernels.enu_frame(
                self.origin.latitude_deg, self.origin.longitude_deg, self.origin.altitude_m
            ),
        )

    def basis_rows(self):
        """East, north, up unit vectors in ECEF, as three 3-tuples."""
        f = self.frame
        return (f[3:6], f[6:9], f[9:12])


def to_local(origin: GeoOrigin, g: GeodeticCoordinate) -> LocalEnu:
    """Convert a geodetic point to ENU meters about the mission origin.

    Raises OutOfTangentRange beyond the 100 km ground-range guard.
    """
    d = kernels.haversine_m(
        origin.origin.latitude_deg,
        origin.origin.longitude_deg,
        g.latitude_deg,
        g.longitude_deg,
    )
    if d >= MAX_TANGENT_RANGE_M:
        raise OutOfTangentRange(f"point {d:.0f} m from origin exceeds tangent guard")
    e, n, u = kernels.geodetic_to_enu(
        g.latitude_deg, g.longitude_deg, g.altitude_m, origin.frame
    )
    return LocalEnu(e, n, u)


def to_geodetic(origin: GeoOrigin, p: LocalEnu) -> GeodeticCoordinate:
    """Exact inverse of :func:`to_local` up to numerical tolerance."""
    lat, lon, alt = kernels.enu_to_geodetic(p.east_m, p.north_m, p.up_m, origin.frame)
    return GeodeticCoordinate(lat, lon, alt)


def ground_distance(a: GeodeticCoordinate, b: GeodeticCoordinate) -> float:
    """Horizontal great-circle distance in meters, ignoring altitude."""
    return kernels.haversine_m(
        a.latitude_deg, a.longitude_deg, b.latitude_deg, b.longitude_deg
    )
