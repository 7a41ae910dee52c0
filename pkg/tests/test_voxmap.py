"""Voxel grid fusion, colormap and mesh extraction tests."""
import math
import random
import struct

import numpy as np
import pytest

from radnav.geodesy import LocalEnu
from radnav.radiation import (
    PointSource,
    RadiationMeasurement,
    RadiationScenario,
    expected_rate,
    sample_counts,
)
from radnav.voxmap import (
    ColormapSpec,
    IndexOutOfBounds,
    MESH_MAGIC,
    RevisionAhead,
    VoxelGrid,
    colorize,
    extract_mesh,
)


def small_grid():
    return VoxelGrid(LocalEnu(-10.0, -10.0, 0.0), 2.0, (10, 10, 5))


def measurement(t, east, north, up, counts, dt=1.0):
    return RadiationMeasurement(t, LocalEnu(east, north, up), counts, dt)


class TestInsertAndRate:
    def test_single_measurement_rate(self):
        grid = small_grid()
        index = grid.insert_measurement(measurement(0.0, 1.0, 1.0, 1.0, 100))
        assert index == (5, 5, 0)
        assert grid.voxel_rate(index) == 100.0

    def test_pooled_mean(self):
        grid = small_grid()
        grid.insert_measurement(measurement(0.0, 1.0, 1.0, 1.0, 100))
        grid.insert_measurement(measurement(1.0, 1.2, 1.2, 1.2, 0))
        assert grid.voxel_rate((5, 5, 0)) == 50.0

    def test_out_of_bounds_counted_not_raised(self):
        grid = small_grid()
        assert grid.insert_measurement(measurement(0.0, 500.0, 0.0, 1.0, 3)) is None
        assert grid.insert_measurement(measurement(1.0, 0.0, 0.0, -1.0, 3)) is None
        assert grid.ignored_count == 2
        assert grid.revision == 0

    def test_unobserved_voxel(self):
        grid = small_grid()
        assert grid.voxel_rate((0, 0, 0)) is None
        with pytest.raises(IndexOutOfBounds):
            grid.voxel_rate((10, 0, 0))

    def test_accumulators_never_decrease(self):
        grid = small_grid()
        rng = random.Random(8)
        prev_counts = 0.0
        prev_exposure = 0.0
        for i in range(200):
            grid.insert_measurement(
                measurement(float(i), rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(0, 9),
                            rng.randint(0, 50), 0.5)
            )
            total_counts = grid.counts_sum.sum()
            total_exposure = grid.exposure_s.sum()
            assert total_counts >= prev_counts
            assert total_exposure >= prev_exposure
            prev_counts, prev_exposure = total_counts, total_exposure

    def test_statistical_convergence_to_truth(self):
        # 10k Poisson draws at rate 5.0 fused into one voxel: pooled mean
        # lands within 3 sigma of the truth.
        grid = small_grid()
        rng = np.random.Generator(np.random.PCG64(1))
        dt = 0.5
        n = 10_000
        for i in range(n):
            counts = sample_counts(5.0, dt, rng)
            grid.insert_measurement(measurement(i * dt, 1.0, 1.0, 1.0, counts, dt))
        estimate = grid.voxel_rate((5, 5, 0))
        sigma = math.sqrt(5.0 / (n * dt))
        assert abs(estimate - 5.0) < 3.0 * sigma

    def test_estimator_consistency_with_field(self):
        # Measurements generated by the field model at a fixed point:
        # voxel_rate converges on expected_rate as exposure grows.
        scn = RadiationScenario(
            sources=(PointSource(LocalEnu(0.0, 0.0, 0.0), 4.0 * math.pi * 25.0),),
            background=1.0,
        )
        p = LocalEnu(5.0, 0.0, 1.0)
        truth = expected_rate(scn, p)
        grid = small_grid()
        rng = np.random.Generator(np.random.PCG64(12))
        dt = 0.5
        n = 8000
        for i in range(n):
            grid.insert_measurement(
                measurement(i * dt, p.east_m, p.north_m, p.up_m, sample_counts(truth, dt, rng), dt)
            )
        estimate = grid.voxel_rate(grid.voxel_of(p))
        assert abs(estimate - truth) < 3.0 * math.sqrt(truth / (n * dt))

    def test_permutation_invariance(self):
        rng = random.Random(55)
        ms = [
            measurement(float(i), rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(0, 9),
                        rng.randint(0, 30), rng.choice([0.25, 0.5, 1.0]))
            for i in range(300)
        ]
        reference = None
        for shuffle in range(20):
            grid = small_grid()
            order = ms[:]
            rng.shuffle(order)
            for m in order:
                grid.insert_measurement(m)
            digest = grid.checksum()
            if reference is None:
                reference = digest
            assert digest == reference


class TestDelta:
    def test_delta_since_current_is_empty(self):
        grid = small_grid()
        grid.insert_measurement(measurement(0.0, 1.0, 1.0, 1.0, 5))
        assert grid.delta_since(grid.revision) == []

    def test_delta_since_zero_is_everything(self):
        grid = small_grid()
        grid.insert_measurement(measurement(0.0, 1.0, 1.0, 1.0, 5))
        grid.insert_measurement(measurement(1.0, -5.0, 3.0, 2.0, 7))
        delta = grid.delta_since(0)
        assert len(delta) == 2

    def test_delta_set_semantics(self):
        grid = small_grid()
        rev0 = grid.revision
        grid.insert_measurement(measurement(0.0, 1.0, 1.0, 1.0, 5))
        grid.insert_measurement(measurement(1.0, 1.1, 1.1, 1.1, 3))
        grid.insert_measurement(measurement(2.0, -5.0, 3.0, 2.0, 7))
        delta = grid.delta_since(rev0)
        assert len(delta) == 2  # two distinct voxels, latest values once each
        by_index = {tuple(i): (r, e) for i, r, e in delta}
        assert by_index[(5, 5, 0)] == (4.0, 2.0)

    def test_revision_ahead(self):
        grid = small_grid()
        with pytest.raises(RevisionAhead):
            grid.delta_since(1)

    def test_delta_stream_reconstructs_grid(self):
        # Applying every delta from revision 0 in cut points reproduces
        # the full per-voxel state.
        rng = random.Random(4242)
        grid = small_grid()
        replica = {}
        last_rev = 0
        for i in range(500):
            grid.insert_measurement(
                measurement(float(i), rng.uniform(-12, 12), rng.uniform(-12, 12),
                            rng.uniform(-2, 11), rng.randint(0, 20), 0.5)
            )
            if rng.random() < 0.1:
                for index, rate, exposure in grid.delta_since(last_rev):
                    replica[tuple(index)] = (rate, exposure)
                last_rev = grid.revision
        for index, rate, exposure in grid.delta_since(last_rev):
            replica[tuple(index)] = (rate, exposure)
        observed = {}
        for ix in range(10):
            for iy in range(10):
                for iz in range(5):
                    r = grid.voxel_rate((ix, iy, iz))
                    if r is not None:
                        observed[(ix, iy, iz)] = (r, float(grid.exposure_s[ix, iy, iz]))
        assert replica == observed


class TestColormap:
    def test_domain_endpoints_exact(self):
        spec = ColormapSpec()
        assert colorize(spec, spec.rate_min) == (0, 0, 255, 200)
        assert colorize(spec, spec.rate_max) == (255, 0, 0, 200)

    def test_clamping(self):
        spec = ColormapSpec()
        assert colorize(spec, 1e-9) == (0, 0, 255, 200)
        assert colorize(spec, 1e9) == (255, 0, 0, 200)

    def test_geometric_midpoint_two_anchor(self):
        spec = ColormapSpec(
            rate_min=1.0, rate_max=100.0,
            anchors=((0.0, (0, 0, 255, 200)), (1.0, (255, 0, 0, 200))),
        )
        mid = math.sqrt(1.0 * 100.0)  # geometric midpoint -> t = 0.5
        assert colorize(spec, mid) == (128, 0, 128, 200)  # 127.5 rounds away from zero

    def test_default_midpoint_hits_green_anchor(self):
        spec = ColormapSpec()
        mid = math.sqrt(spec.rate_min * spec.rate_max)
        assert colorize(spec, mid) == (0, 255, 0, 200)

    def test_monotone_parameter(self):
        spec = ColormapSpec()
        rates = [0.05, 0.1, 0.5, 2.0, 31.6, 100.0, 999.0, 1000.0, 5000.0]

        def t_of(rate):
            lo, hi = math.log10(spec.rate_min), math.log10(spec.rate_max)
            return min(1.0, max(0.0, (math.log10(rate) - lo) / (hi - lo)))

        ts = [t_of(r) for r in rates]
        assert ts == sorted(ts)
        # red channel non-decreasing, blue non-increasing along the ramp
        colors = [colorize(spec, r) for r in rates]
        reds = [c[0] for c in colors]
        blues = [c[2] for c in colors]
        assert reds == sorted(reds)
        assert blues == sorted(blues, reverse=True)


class TestMesh:
    def test_empty_grid_empty_mesh(self):
        mesh = extract_mesh(small_grid(), ColormapSpec(), 0.5)
        assert len(mesh.vertices) == 0
        assert len(mesh.triangles) == 0
        assert len(mesh.colors) == 0

    def test_single_voxel_counts(self):
        grid = small_grid()
        grid.insert_measurement(measurement(0.0, 1.0, 1.0, 1.0, 10))
        mesh = extract_mesh(grid, ColormapSpec(), 0.5)
        assert mesh.vertices.shape == (8, 3)
        assert mesh.triangles.shape == (12, 3)
        assert mesh.colors.shape == (1, 4)
        assert mesh.triangles.max() < len(mesh.vertices)
        # cube spans exactly the voxel extents
        assert mesh.vertices.min(axis=0) == pytest.approx([0.0, 0.0, 0.0])
        assert mesh.vertices.max(axis=0) == pytest.approx([2.0, 2.0, 2.0])

    def test_k_voxels_no_welding(self):
        grid = small_grid()
        pts = [(1.0, 1.0, 1.0), (3.0, 1.0, 1.0), (-7.0, -7.0, 8.0)]
        for i, (e, n, u) in enumerate(pts):
            grid.insert_measurement(measurement(float(i), e, n, u, 5))
        mesh = extract_mesh(grid, ColormapSpec(), 0.5)
        assert len(mesh.vertices) == 8 * 3
        assert len(mesh.triangles) == 12 * 3
        assert len(mesh.colors) == 3

    def test_min_exposure_threshold(self):
        grid = small_grid()
        grid.insert_measurement(measurement(0.0, 1.0, 1.0, 1.0, 5, dt=0.25))
        grid.insert_measurement(measurement(1.0, -5.0, 1.0, 1.0, 5, dt=2.0))
        mesh = extract_mesh(grid, ColormapSpec(), 1.0)
        assert len(mesh.colors) == 1

    def test_extraction_is_pure(self):
        grid = small_grid()
        rng = random.Random(3)
        for i in range(100):
            grid.insert_measurement(
                measurement(float(i), rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(0, 9),
                            rng.randint(0, 9))
            )
        a = extract_mesh(grid, ColormapSpec(), 0.5).to_bytes()
        b = extract_mesh(grid, ColormapSpec(), 0.5).to_bytes()
        assert a == b

    def test_binary_layout(self):
        grid = small_grid()
        grid.insert_measurement(measurement(0.0, 1.0, 1.0, 1.0, 10))
        blob = extract_mesh(grid, ColormapSpec(), 0.5).to_bytes()
        assert blob[:4] == MESH_MAGIC
        version, nverts, ntris = struct.unpack_from("<III", blob, 4)
        assert (version, nverts, ntris) == (1, 8, 12)
        expected_len = 16 + nverts * 12 + ntris * 12 + (nverts // 8) * 4
        assert len(blob) == expected_len
        first_vertex = struct.unpack_from("<3f", blob, 16)
        assert first_vertex == (0.0, 0.0, 0.0)
