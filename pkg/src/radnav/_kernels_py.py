"""Pure-Python numerical kernels (fallback for the compiled extension).

Scalar math used on the hot path of every simulation tick: WGS84
geodetic <-> ECEF <-> local-ENU transforms and the inverse-square
count-rate evaluation. The compiled twin in ``_kernels.pyx`` performs
the same operations in the same order; the only divergence is last-ulp
libm rounding (the C compiler fuses sin/cos pairs into sincos), which
keeps the backends within a few nanometers of each other at Earth
scale. Keep the two files in lockstep when editing either one.

All functions are pure and take/return plain floats and tuples.
"""
import math

BACKEND = "python"

# WGS84 ellipsoid
WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)
WGS84_B = WGS84_A * (1.0 - WGS84_F)

# IUGG mean radius R1 = (2a + b) / 3, used for spherical ground distance.
EARTH_MEAN_RADIUS_M = (2.0 * WGS84_A + WGS84_B) / 3.0

_DEG = math.pi / 180.0
_FOUR_PI = 4.0 * math.pi


def geodetic_to_ecef(lat_deg, lon_deg, alt_m):
    """WGS84 geodetic coordinates to ECEF meters."""
    lat = lat_deg * _DEG
    lon = lon_deg * _DEG
    sin_lat = math.sin(lat)
    cos_lat = math.cos(lat)
    sin_lon = math.sin(lon)
    cos_lon = math.cos(lon)
    n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
    x = (n + alt_m) * cos_lat * cos_lon
    y = (n + alt_m) * cos_lat * sin_lon
    z = (n * (1.0 - WGS84_E2) + alt_m) * sin_lat
    return x, y, z


def ecef_to_geodetic(x, y, z):
    """ECEF meters to WGS84 geodetic, iterated to < 1e-12 rad.

    Fixed-point iteration on the latitude; gains a factor of ~e^2 per
    step, so the 1e-12 target is met in a handful of iterations for any
    near-surface point. Altitude uses the pole-safe projection
    h = p*cos(lat) + z*sin(lat) - a*sqrt(1 - e^2*sin^2(lat)).
    """
    p = math.sqrt(x * x + y * y)
    lon = math.atan2(y, x)
    lat = math.atan2(z, p * (1.0 - WGS84_E2))
    for _ in range(12):
        sin_lat = math.sin(lat)
        n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
        new_lat = math.atan2(z + WGS84_E2 * n * sin_lat, p)
        done = abs(new_lat - lat) < 1e-12
        lat = new_lat
        if done:
            break
    sin_lat = math.sin(lat)
    cos_lat = math.cos(lat)
    alt = p * cos_lat + z * sin_lat - WGS84_A * math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
    return lat / _DEG, lon / _DEG, alt


def enu_frame(lat_deg, lon_deg, alt_m):
    """Origin data for ENU transforms: ECEF position + rotation rows.

    Returns a 12-tuple (ox, oy, oz, e_x, e_y, e_z, n_x, n_y, n_z,
    u_x, u_y, u_z): the origin's ECEF position followed by the east,
    north and up unit vectors expressed in ECEF.
    """
    ox, oy, oz = geodetic_to_ecef(lat_deg, lon_deg, alt_m)
    lat = lat_deg * _DEG
    lon = lon_deg * _DEG
    sin_lat = math.sin(lat)
    cos_lat = math.cos(lat)
    sin_lon = math.sin(lon)
    cos_lon = math.cos(lon)
    return (
        ox, oy, oz,
        -sin_lon, cos_lon, 0.0,
        -sin_lat * cos_lon, -sin_lat * sin_lon, cos_lat,
        cos_lat * cos_lon, cos_lat * sin_lon, sin_lat,
    )


def geodetic_to_enu(lat_deg, lon_deg, alt_m, frame):
    """Geodetic point to ENU meters relative to the frame origin."""
    x, y, z = geodetic_to_ecef(lat_deg, lon_deg, alt_m)
    dx = x - frame[0]
    dy = y - frame[1]
    dz = z - frame[2]
    e = frame[3] * dx + frame[4] * dy + frame[5] * dz
    n = frame[6] * dx + frame[7] * dy + frame[8] * dz
    u = frame[9] * dx + frame[10] * dy + frame[11] * dz
    return e, n, u


def enu_to_geodetic(e, n, u, frame):
    """ENU meters relative to the frame origin back to geodetic."""
    x = frame[0] + frame[3] * e + frame[6] * n + frame[9] * u
    y = frame[1] + frame[4] * e + frame[7] * n + frame[10] * u
    z = frame[2] + frame[5] * e + frame[8] * n + frame[11] * u
    return ecef_to_geodetic(x, y, z)


def haversine_m(lat1_deg, lon1_deg, lat2_deg, lon2_deg):
    """Great-circle distance on the WGS84 mean-radius sphere, meters."""
    lat1 = lat1_deg * _DEG
    lat2 = lat2_deg * _DEG
    dlat = (lat2_deg - lat1_deg) * _DEG
    dlon = (lon2_deg - lon1_deg) * _DEG
    sdlat = math.sin(0.5 * dlat)
    sdlon = math.sin(0.5 * dlon)
    a = sdlat * sdlat + math.cos(lat1) * math.cos(lat2) * sdlon * sdlon
    return 2.0 * EARTH_MEAN_RADIUS_M * math.atan2(math.sqrt(a), math.sqrt(1.0 - a))


def point_rate(px, py, pz, sources, background, clamp_epsilon):
    """Expected count rate at an ENU point, counts/s.

    background + sum_i S_i / (4*pi*max(r_i, eps)^2) over point sources
    given as an iterable of (east, north, up, strength) tuples.
    """
    total = background
    for sx, sy, sz, strength in sources:
        dx = px - sx
        dy = py - sy
        dz = pz - sz
        r = math.sqrt(dx * dx + dy * dy + dz * dz)
        if r < clamp_epsilon:
            r = clamp_epsilon
        total += strength / (_FOUR_PI * r * r)
    return total
