"""Voxel fusion of radiation measurements and colorized mesh extraction.

Each measurement is attributed to the voxel containing it; a voxel
accumulates total counts and total exposure seconds, and its rate
estimate is the pooled mean counts/exposure. Accumulation commutes, so
any ordering of the same measurements produces identical grids.

Rendering: one axis-aligned cube per sufficiently-exposed voxel,
colored on a log10 rate scale (blue -> green -> red by default).
Voxels never observed are absent from the mesh: absence of data is not
absence of radiation.

Concurrency: single-writer grid (the server fusion loop); extracted
deltas and meshes are immutable snapshots.
"""
import math
import struct
from dataclasses import dataclass

import numpy as np

from radnav.geodesy import LocalEnu
from radnav.radiation import RadiationMeasurement


class IndexOutOfBounds(IndexError):
    pass


class RevisionAhead(ValueError):
    """delta_since() asked about a revision the grid has not reached."""


MESH_MAGIC = b"RMSH"
MESH_VERSION = 1

# Corner offsets of a unit cube, x varying fastest.
_CORNERS = np.array(
    [(x, y, z) for z in (0, 1) for y in (0, 1) for x in (0, 1)], dtype=np.float64
)
# Two triangles per face, outward winding, indexing the corners above.
_CUBE_TRIANGLES = np.array(
    [
        (0, 2, 1), (1, 2, 3),  # bottom (z=0)
        (4, 5, 6), (5, 7, 6),  # top (z=1)
        (0, 1, 4), (1, 5, 4),  # south (y=0)
        (2, 6, 3), (3, 6, 7),  # north (y=1)
        (0, 4, 2), (2, 4, 6),  # west (x=0)
        (1, 3, 5), (3, 7, 5),  # east (x=1)
    ],
    dtype=np.uint32,
)


@dataclass(frozen=True)
class ColormapSpec:
    """log10 rate -> RGBA gradient with fixed control points.

    Anchors are (t, rgba) pairs on the normalized log scale; rates at or
    beyond the domain clamp to the end anchors. Channel interpolation is
    piecewise linear with half-away-from-zero rounding, so mappings are
    bit-exact and monotone.
    """

    rate_min: float = 0.1
    rate_max: float = 1000.0
    anchors: tuple = (
        (0.0, (0, 0, 255, 200)),
        (0.5, (0, 255, 0, 200)),
        (1.0, (255, 0, 0, 200)),
    )

    def __post_init__(self):
        if not 0.0 < self.rate_min < self.rate_max:
            raise ValueError(f"need 0 < rate_min < rate_max, got [{self.rate_min}, {self.rate_max}]")
        ts = [t for t, _ in self.anchors]
        if len(ts) < 2 or ts != sorted(ts) or ts[0] != 0.0 or ts[-1] != 1.0:
            raise ValueError(f"anchors must span t=0..1 in order, got {ts}")


def colorize(spec: ColormapSpec, rate: float) -> tuple:
    """Map a rate estimate to an RGBA 4-tuple of ints in [0, 255]."""
    lo = math.log10(spec.rate_min)
    hi = math.log10(spec.rate_max)
    if rate <= spec.rate_min:
        t = 0.0
    elif rate >= spec.rate_max:
        t = 1.0
    else:
        t = (math.log10(rate) - lo) / (hi - lo)
    anchors = spec.anchors
    if t <= anchors[0][0]:
        return tuple(anchors[0][1])
    for (t0, c0), (t1, c1) in zip(anchors, anchors[1:]):
        if t <= t1:
            f = (t - t0) / (t1 - t0)
            return tuple(int(math.floor(a + (b - a) * f + 0.5)) for a, b in zip(c0, c1))
    return tuple(anchors[-1][1])


@dataclass(frozen=True)
class ColoredMesh:
    """Cube-per-voxel mesh snapshot: 8 vertices / 12 triangles / 1 color each."""

    vertices: np.ndarray  # float32 (n, 3) ENU meters
    triangles: np.ndarray  # uint32 (m, 3)
    colors: np.ndarray  # uint8 (k, 4), one row per emitted voxel
    source_revision: int

    def to_bytes(self) -> bytes:
        """Little-endian binary export: RMSH header + arrays."""
        header = MESH_MAGIC + struct.pack(
            "<III", MESH_VERSION, len(self.vertices), len(self.triangles)
        )
        return (
            header
            + self.vertices.astype("<f4").tobytes()
            + self.triangles.astype("<u4").tobytes()
            + self.colors.astype("u1").tobytes()
        )


class VoxelGrid:
    """Axis-aligned voxel accumulators over the mission's local frame.

    origin_enu is the minimum corner; dims are voxel counts along
    east/north/up. The revision counter bumps once per accepted
    measurement, and each voxel remembers the revision that last touched
    it, which is what delta extraction scans.
    """

    def __init__(self, origin_enu: LocalEnu, resolution_m: float, dims):
        if not resolution_m > 0.0:
            raise ValueError(f"resolution must be positive, got {resolution_m}")
        nx, ny, nz = (int(d) for d in dims)
        if min(nx, ny, nz) <= 0:
            raise ValueError(f"dims must be positive, got {dims}")
        self.origin_enu = origin_enu
        self.resolution_m = float(resolution_m)
        self.dims = (nx, ny, nz)
        self.counts_sum = np.zeros((nx, ny, nz), dtype=np.float64)
        self.exposure_s = np.zeros((nx, ny, nz), dtype=np.float64)
        self._last_touch = np.zeros((nx, ny, nz), dtype=np.uint64)
        self.revision = 0
        self.ignored_count = 0

    def voxel_of(self, p: LocalEnu):
        """Index of the voxel containing an ENU point, or None outside."""
        ix = math.floor((p.east_m - self.origin_enu.east_m) / self.resolution_m)
        iy = math.floor((p.north_m - self.origin_enu.north_m) / self.resolution_m)
        iz = math.floor((p.up_m - self.origin_enu.up_m) / self.resolution_m)
        nx, ny, nz = self.dims
        if 0 <= ix < nx and 0 <= iy < ny and 0 <= iz < nz:
            return (ix, iy, iz)
        return None

    def insert_measurement(self, m: RadiationMeasurement):
        """Fuse one measurement; returns the touched voxel index or None.

        Out-of-bounds measurements are not an error: they are counted in
        ignored_count and dropped.
        """
        index = self.voxel_of(m.position)
        if index is None:
            self.ignored_count += 1
            return None
        self.counts_sum[index] += m.counts
        self.exposure_s[index] += m.integration_dt_s
        self.revision += 1
        self._last_touch[index] = self.revision
        return index

    def _check_index(self, index):
        nx, ny, nz = self.dims
        ix, iy, iz = index
        if not (0 <= ix < nx and 0 <= iy < ny and 0 <= iz < nz):
            raise IndexOutOfBounds(f"voxel index {index} outside dims {self.dims}")
        return (int(ix), int(iy), int(iz))

    def voxel_rate(self, index):
        """Pooled-mean rate estimate, or None while unobserved."""
        index = self._check_index(index)
        exposure = self.exposure_s[index]
        if exposure <= 0.0:
            return None
        return float(self.counts_sum[index] / exposure)

    def _scan_indices(self, mask):
        """Indices of set voxels in x-fastest scan order, as an (n, 3) array."""
        hits = np.argwhere(mask.transpose(2, 1, 0))
        return hits[:, ::-1]  # back to (ix, iy, iz)

    def delta_since(self, revision: int):
        """Voxels touched after the given revision, each reported once.

        Returns a list of (index, rate, exposure) in x-fastest scan
        order, with the latest accumulator values.
        """
        if revision > self.revision:
            raise RevisionAhead(f"revision {revision} is ahead of grid revision {self.revision}")
        entries = []
        for ix, iy, iz in self._scan_indices(self._last_touch > np.uint64(revision)):
            index = (int(ix), int(iy), int(iz))
            entries.append(
                (index, float(self.counts_sum[index] / self.exposure_s[index]),
                 float(self.exposure_s[index]))
            )
        return entries

    def checksum(self) -> str:
        """SHA-256 over the raw accumulator arrays (order: counts, exposure)."""
        import hashlib

        h = hashlib.sha256()
        h.update(self.counts_sum.tobytes())
        h.update(self.exposure_s.tobytes())
        return h.hexdigest()

    def observed_count(self) -> int:
        return int(np.count_nonzero(self.exposure_s > 0.0))


def extract_mesh(grid: VoxelGrid, spec: ColormapSpec, min_exposure_s: float) -> ColoredMesh:
    """Cube-per-voxel mesh of every voxel with exposure >= min_exposure_s.

    Deterministic: voxels are scanned x-fastest, cube corners follow the
    fixed corner table, and no vertices are welded between neighboring
    cubes (8 vertices and 12 triangles per voxel, one RGBA per voxel).
    """
    indices = grid._scan_indices(grid.exposure_s >= min_exposure_s)
    k = len(indices)
    if k == 0:
        return ColoredMesh(
            vertices=np.zeros((0, 3), dtype=np.float32),
            triangles=np.zeros((0, 3), dtype=np.uint32),
            colors=np.zeros((0, 4), dtype=np.uint8),
            source_revision=grid.revision,
        )
    res = grid.resolution_m
    base = np.array(grid.origin_enu.as_tuple(), dtype=np.float64)
    corners = indices[:, None, :] * res + _CORNERS[None, :, :] * res + base
    vertices = corners.reshape(-1, 3).astype(np.float32)
    triangles = (
        _CUBE_TRIANGLES[None, :, :] + (np.arange(k, dtype=np.uint32) * 8)[:, None, None]
    ).reshape(-1, 3).astype(np.uint32)
    colors = np.empty((k, 4), dtype=np.uint8)
    for row, (ix, iy, iz) in enumerate(indices):
        rate = grid.counts_sum[ix, iy, iz] / grid.exposure_s[ix, iy, iz]
        colors[row] = colorize(spec, rate)
    return ColoredMesh(
        vertices=vertices, triangles=triangles, colors=colors, source_revision=grid.revision
    )
