# cython: language_level=3, boundscheck=False, cdivision=True
"""Compiled numerical kernels.

Twin of ``_kernels_py.py``: identical algorithms and operation order,
agreeing with the pure-Python backend to within last-ulp libm rounding
(nanometers at Earth scale). Keep both files in lockstep when editing
either one.
"""
from libc.math cimport atan2, cos, fabs, sin, sqrt

BACKEND = "cython"

cdef double _WGS84_A = 6378137.0
cdef double _WGS84_F = 1.0 / 298.257223563
cdef double _WGS84_E2 = _WGS84_F * (2.0 - _WGS84_F)
cdef double _WGS84_B = _WGS84_A * (1.0 - _WGS84_F)
cdef double _R_MEAN = (2.0 * _WGS84_A + _WGS84_B) / 3.0
cdef double _PI = 3.14159265358979323846
cdef double _DEG = _PI / 180.0
cdef double _FOUR_PI = 4.0 * _PI

WGS84_A = _WGS84_A
WGS84_F = _WGS84_F
WGS84_E2 = _WGS84_E2
WGS84_B = _WGS84_B
EARTH_MEAN_RADIUS_M = _R_MEAN


cdef inline (double, double, double) _geodetic_to_ecef(double lat_deg, double lon_deg, double alt_m):
    cdef double lat = lat_deg * _DEG
    cdef double lon = lon_deg * _DEG
    cdef double sin_lat = sin(lat)
    cdef double cos_lat = cos(lat)
    cdef double sin_lon = sin(lon)
    cdef double cos_lon = cos(lon)
    cdef double n = _WGS84_A / sqrt(1.0 - _WGS84_E2 * sin_lat * sin_lat)
    cdef double x = (n + alt_m) * cos_lat * cos_lon
    cdef double y = (n + alt_m) * cos_lat * sin_lon
    cdef double z = (n * (1.0 - _WGS84_E2) + alt_m) * sin_lat
    return x, y, z


cdef inline (double, double, double) _ecef_to_geodetic(double x, double y, double z):
    cdef double p = sqrt(x * x + y * y)
    cdef double lon = atan2(y, x)
    cdef double lat = atan2(z, p * (1.0 - _WGS84_E2))
    cdef double sin_lat, n, new_lat, alt, cos_lat
    cdef bint done
    cdef int i
    for i in range(12):
        sin_lat = sin(lat)
        n = _WGS84_A / sqrt(1.0 - _WGS84_E2 * sin_lat * sin_lat)
        new_lat = atan2(z + _WGS84_E2 * n * sin_lat, p)
        done = fabs(new_lat - lat) < 1e-12
        lat = new_lat
        if done:
            break
    sin_lat = sin(lat)
    cos_lat = cos(lat)
    alt = p * cos_lat + z * sin_lat - _WGS84_A * sqrt(1.0 - _WGS84_E2 * sin_lat * sin_lat)
    return lat / _DEG, lon / _DEG, alt


def geodetic_to_ecef(double lat_deg, double lon_deg, double alt_m):
    """WGS84 geodetic coordinates to ECEF meters."""
    cdef double x, y, z
    x, y, z = _geodetic_to_ecef(lat_deg, lon_deg, alt_m)
    return x, y, z


def ecef_to_geodetic(double x, double y, double z):
    """ECEF meters to WGS84 geodetic, iterated to < 1e-12 rad."""
    cdef double lat, lon, alt
    lat, lon, alt = _ecef_to_geodetic(x, y, z)
    return lat, lon, alt


def enu_frame(double lat_deg, double lon_deg, double alt_m):
    """Origin data for ENU transforms: ECEF position + rotation rows."""
    cdef double ox, oy, oz
    ox, oy, oz = _geodetic_to_ecef(lat_deg, lon_deg, alt_m)
    cdef double lat = lat_deg * _DEG
    cdef double lon = lon_deg * _DEG
    cdef double sin_lat = sin(lat)
    cdef double cos_lat = cos(lat)
    cdef double sin_lon = sin(lon)
    cdef double cos_lon = cos(lon)
    return (
        ox, oy, oz,
        -sin_lon, cos_lon, 0.0,
        -sin_lat * cos_lon, -sin_lat * sin_lon, cos_lat,
        cos_lat * cos_lon, cos_lat * sin_lon, sin_lat,
    )


def geodetic_to_enu(double lat_deg, double lon_deg, double alt_m, frame):
    """Geodetic point to ENU meters relative to the frame origin."""
    cdef double x, y, z
    x, y, z = _geodetic_to_ecef(lat_deg, lon_deg, alt_m)
    cdef double dx = x - <double>frame[0]
    cdef double dy = y - <double>frame[1]
    cdef double dz = z - <double>frame[2]
    cdef double e = <double>frame[3] * dx + <double>frame[4] * dy + <double>frame[5] * dz
    cdef double n = <double>frame[6] * dx + <double>frame[7] * dy + <double>frame[8] * dz
    cdef double u = <double>frame[9] * dx + <double>frame[10] * dy + <double>frame[11] * dz
    return e, n, u


def enu_to_geodetic(double e, double n, double u, frame):
    """ENU meters relative to the frame origin back to geodetic."""
    cdef double x = <double>frame[0] + <double>frame[3] * e + <double>frame[6] * n + <double>frame[9] * u
    cdef double y = <double>frame[1] + <double>frame[4] * e + <double>frame[7] * n + <double>frame[10] * u
    cdef double z = <double>frame[2] + <double>frame[5] * e + <double>frame[8] * n + <double>frame[11] * u
    cdef double lat, lon, alt
    lat, lon, alt = _ecef_to_geodetic(x, y, z)
    return lat, lon, alt


def haversine_m(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg):
    """Great-circle distance on the WGS84 mean-radius sphere, meters."""
    cdef double lat1 = lat1_deg * _DEG
    cdef double lat2 = lat2_deg * _DEG
    cdef double dlat = (lat2_deg - lat1_deg) * _DEG
    cdef double dlon = (lon2_deg - lon1_deg) * _DEG
    cdef double sdlat = sin(0.5 * dlat)
    cdef double sdlon = sin(0.5 * dlon)
    cdef double a = sdlat * sdlat + cos(lat1) * cos(lat2) * sdlon * sdlon
    return 2.0 * _R_MEAN * atan2(sqrt(a), sqrt(1.0 - a))


def point_rate(double px, double py, double pz, sources, double background, double clamp_epsilon):
    """Expected count rate at an ENU point, counts/s."""
    cdef double total = background
    cdef double sx, sy, sz, strength, dx, dy, dz, r
    for src in sources:
        sx = <double>src[0]
        sy = <double>src[1]
        sz = <double>src[2]
        strength = <double>src[3]
        dx = px - sx
        dy = py - sy
        dz = pz - sz
        r = sqrt(dx * dx + dy * dy + dz * dz)
        if r < clamp_epsilon:
            r = clamp_epsilon
        total += strength / (_FOUR_PI * r * r)
    return total
