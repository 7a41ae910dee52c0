"""Geodetic <-> ENU conversion tests, checked against independent oracles."""
import math
import random

import pytest

from radnav import geodesy
from radnav.geodesy import (
    GeodeticCoordinate,
    GeoOrigin,
    InvalidCoordinate,
    LocalEnu,
    OutOfTangentRange,
    ground_distance,
    to_geodetic,
    to_local,
)

from oracles import (
    oracle_geodetic_to_enu,
    oracle_enu_to_geodetic,
    oracle_spherical_distance,
)

BERKELEY = GeodeticCoordinate(37.875, -122.259, 0.0)


@pytest.fixture
def origin():
    return GeoOrigin(BERKELEY)


class TestTypes:
    def test_longitude_normalized(self):
        assert GeodeticCoordinate(0.0, 181.0).longitude_deg == -179.0
        assert GeodeticCoordinate(0.0, -180.0).longitude_deg == -180.0
        assert GeodeticCoordinate(0.0, 180.0).longitude_deg == -180.0
        assert GeodeticCoordinate(0.0, 359.0).longitude_deg == -1.0

    @pytest.mark.parametrize("lat", [90.001, -90.001, math.nan, math.inf])
    def test_bad_latitude_rejected(self, lat):
        with pytest.raises(InvalidCoordinate):
            GeodeticCoordinate(lat, 0.0)

    def test_non_finite_altitude_rejected(self):
        with pytest.raises(InvalidCoordinate):
            GeodeticCoordinate(0.0, 0.0, math.nan)

    def test_enu_guard(self):
        with pytest.raises(OutOfTangentRange):
            LocalEnu(100_000.0, 0.0, 0.0)
        with pytest.raises(InvalidCoordinate):
            LocalEnu(math.inf, 0.0, 0.0)
        LocalEnu(99_999.0, 0.0, 0.0)  # just inside the guard

    def test_basis_orthonormal_random_origins(self):
        rng = random.Random(20240311)
        for _ in range(1000):
            g = GeodeticCoordinate(
                rng.uniform(-89.9, 89.9), rng.uniform(-180.0, 180.0), rng.uniform(-100.0, 4000.0)
            )
            rows = GeoOrigin(g).basis_rows()
            for r in rows:
                assert abs(math.sqrt(sum(c * c for c in r)) - 1.0) < 1e-12
            for i in range(3):
                for j in range(i + 1, 3):
                    dot = sum(a * b for a, b in zip(rows[i], rows[j]))
                    assert abs(dot) < 1e-12


class TestToLocal:
    def test_origin_maps_to_zero(self, origin):
        p = to_local(origin, BERKELEY)
        assert p.norm() < 1e-9

    def test_pure_up_displacement(self, origin):
        g = GeodeticCoordinate(BERKELEY.latitude_deg, BERKELEY.longitude_deg, 10.0)
        p = to_local(origin, g)
        assert abs(p.east_m) < 1e-9
        assert abs(p.north_m) < 1e-9
        assert abs(p.up_m - 10.0) < 1e-9

    def test_small_latitude_step_against_oracle(self, origin):
        # Oracle value for +0.001 deg latitude at this origin: north
        # 110.9941 m, east ~0. Frozen from tests/oracles.py.
        g = GeodeticCoordinate(37.876, -122.259, 0.0)
        p = to_local(origin, g)
        expected = oracle_geodetic_to_enu(37.876, -122.259, 0.0, 37.875, -122.259, 0.0)
        assert abs(p.east_m - expected[0]) < 0.01
        assert abs(p.north_m - expected[1]) < 0.01
        assert abs(p.up_m - expected[2]) < 0.01
        assert abs(p.north_m - 110.9941) < 1e-3
        assert abs(p.east_m) < 1e-6

    def test_out_of_range_rejected(self, origin):
        far = GeodeticCoordinate(38.9, -121.0, 0.0)  # ~160 km away
        with pytest.raises(OutOfTangentRange):
            to_local(origin, far)


class TestToGeodetic:
    def test_zero_maps_to_origin(self, origin):
        g = to_geodetic(origin, LocalEnu(0.0, 0.0, 0.0))
        assert abs(g.latitude_deg - BERKELEY.latitude_deg) < 1e-12
        assert abs(g.longitude_deg - BERKELEY.longitude_deg) < 1e-12
        assert abs(g.altitude_m) < 1e-6

    def test_north_step_against_oracle(self, origin):
        g = to_geodetic(origin, LocalEnu(0.0, 110.95, 0.0))
        lat, lon, alt = oracle_enu_to_geodetic([0.0, 110.95, 0.0], 37.875, -122.259, 0.0)
        assert abs(g.latitude_deg - lat) * 111_320.0 < 0.01
        assert abs(g.longitude_deg - lon) * 111_320.0 < 0.01
        assert abs(g.altitude_m - alt) < 0.01
        # roughly one millidegree of latitude
        assert g.latitude_deg - BERKELEY.latitude_deg == pytest.approx(0.001, abs=5e-6)

    def test_round_trip_within_5km(self, origin):
        rng = random.Random(99)
        for _ in range(10_000):
            east = rng.uniform(-5000.0, 5000.0)
            north = rng.uniform(-5000.0, 5000.0)
            up = rng.uniform(-200.0, 1000.0)
            p = LocalEnu(east, north, up)
            back = to_local(origin, to_geodetic(origin, p))
            assert back.distance_to(p) < 1e-6

    def test_local_linearity_at_1km(self, origin):
        # Midpoint of two nearby geodetic points lands on the ENU
        # midpoint. Earth curvature contributes ~d^2/8R, so sub-mm
        # linearity constrains the pair separation to ~100 m; the pairs
        # roam the 1 km working area around the origin.
        rng = random.Random(5)
        for _ in range(200):
            lat_a = BERKELEY.latitude_deg + rng.uniform(-0.009, 0.009)
            lon_a = BERKELEY.longitude_deg + rng.uniform(-0.011, 0.011)
            lat_b = lat_a + rng.uniform(-0.0008, 0.0008)
            lon_b = lon_a + rng.uniform(-0.001, 0.001)
            alt_a = rng.uniform(0.0, 100.0)
            alt_b = alt_a + rng.uniform(-20.0, 20.0)
            a = to_local(origin, GeodeticCoordinate(lat_a, lon_a, alt_a))
            b = to_local(origin, GeodeticCoordinate(lat_b, lon_b, alt_b))
            mid = to_local(
                origin,
                GeodeticCoordinate(
                    (lat_a + lat_b) / 2.0, (lon_a + lon_b) / 2.0, (alt_a + alt_b) / 2.0
                ),
            )
            assert abs(mid.east_m - (a.east_m + b.east_m) / 2.0) < 1e-3
            assert abs(mid.north_m - (a.north_m + b.north_m) / 2.0) < 1e-3
            assert abs(mid.up_m - (a.up_m + b.up_m) / 2.0) < 1e-3


class TestGroundDistance:
    def test_zero_and_symmetry(self):
        a = GeodeticCoordinate(10.0, 20.0, 100.0)
        b = GeodeticCoordinate(-5.0, 21.0, 0.0)
        assert ground_distance(a, a) == 0.0
        assert ground_distance(a, b) == ground_distance(b, a)
        assert ground_distance(a, b) > 0.0

    def test_altitude_ignored(self):
        a = GeodeticCoordinate(10.0, 20.0, 0.0)
        b = GeodeticCoordinate(10.0, 20.0, 5000.0)
        assert ground_distance(a, b) == 0.0

    def test_millidegree_at_equator(self):
        # Spherical oracle: 111.195 m for 0.001 deg of latitude.
        d = ground_distance(GeodeticCoordinate(0.0, 0.0), GeodeticCoordinate(0.001, 0.0))
        assert abs(d - 111.2) < 0.5
        assert abs(d - oracle_spherical_distance(0.0, 0.0, 0.001, 0.0)) < 1e-6

    def test_triangle_inequality(self):
        rng = random.Random(31)
        for _ in range(500):
            pts = [
                GeodeticCoordinate(rng.uniform(-89.0, 89.0), rng.uniform(-180.0, 180.0))
                for _ in range(3)
            ]
            ab = ground_distance(pts[0], pts[1])
            bc = ground_distance(pts[1], pts[2])
            ac = ground_distance(pts[0], pts[2])
            assert ac <= ab + bc + 1e-6


class TestBackends:
    def test_backends_agree(self):
        from radnav import _kernels_py

        try:
            from radnav import _kernels
        except ImportError:
            pytest.skip("compiled kernels not built")
        rng = random.Random(1234)
        for _ in range(2000):
            olat = rng.uniform(-85.0, 85.0)
            olon = rng.uniform(-180.0, 180.0)
            oalt = rng.uniform(-100.0, 1000.0)
            fc = _kernels.enu_frame(olat, olon, oalt)
            fp = _kernels_py.enu_frame(olat, olon, oalt)
            east = rng.uniform(-5000.0, 5000.0)
            north = rng.uniform(-5000.0, 5000.0)
            up = rng.uniform(-100.0, 500.0)
            gc = _kernels.enu_to_geodetic(east, north, up, fc)
            gp = _kernels_py.enu_to_geodetic(east, north, up, fp)
            # last-ulp libm differences only: nanometers at Earth scale
            assert abs(gc[0] - gp[0]) * 111_320.0 < 1e-7
            assert abs(gc[1] - gp[1]) * 111_320.0 < 1e-7
            assert abs(gc[2] - gp[2]) < 1e-7
            ec = _kernels.geodetic_to_enu(gc[0], gc[1], gc[2], fc)
            ep = _kernels_py.geodetic_to_enu(gp[0], gp[1], gp[2], fp)
            assert max(abs(x - y) for x, y in zip(ec, ep)) < 1e-7

    def test_selected_backend_exposed(self):
        assert geodesy.kernels.BACKEND in ("cython", "python")
