"""Compare the compiled kernel backend against the pure-Python fallback.

Times the two hot paths (geodetic<->ENU transforms and point-source rate
evaluation) plus a full headless mission, and checks that the backends
agree numerically while doing it.

    python benchmarks/bench_kernels.py [N]
"""
import math
import random
import sys
import time

from radnav import _kernels_py

try:
    from radnav import _kernels
except ImportError:
    _kernels = None


def bench(label, fn, n):
    start = time.perf_counter()
    fn(n)
    elapsed = time.perf_counter() - start
    rate = n / elapsed
    print(f"  {label:<26} {elapsed * 1e3:9.1f} ms   {rate / 1e3:9.1f} kops/s")
    return elapsed


def transform_loop(kernels, frame, points):
    def run(n):
        for i in range(n):
            e, nn, u = points[i % len(points)]
            lat, lon, alt = kernels.enu_to_geodetic(e, nn, u, frame)
            kernels.geodetic_to_enu(lat, lon, alt, frame)
    return run


def rate_loop(kernels, sources, points):
    def run(n):
        for i in range(n):
            e, nn, u = points[i % len(points)]
            kernels.point_rate(e, nn, u, sources, 0.5, 0.3)
    return run


def mission_run(_n):
    from radnav.scenario import from_dict
    from radnav.server import GroundStation

    cfg = from_dict({
        "name": "bench", "seed": 1,
        "origin": {"lat": 37.875, "lon": -122.259, "alt": 30.0},
        "field": {"background": 0.5,
                  "source": [{"east": 40.0, "north": 40.0, "up": 0.0, "strength": 62831.9}]},
        "mission": {"autostart": True, "waypoint": [
            {"east": 80.0, "north": 0.0, "up": 10.0},
            {"east": 80.0, "north": 80.0, "up": 10.0},
            {"east": 0.0, "north": 80.0, "up": 10.0},
        ]},
    })
    station = GroundStation(cfg)
    for _ in range(1200):
        station.advance_tick()
    return station


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    rng = random.Random(7)
    points = [(rng.uniform(-3000, 3000), rng.uniform(-3000, 3000), rng.uniform(0, 300))
              for _ in range(512)]
    sources = tuple((rng.uniform(-100, 100), rng.uniform(-100, 100), 0.0, 50_000.0)
                    for _ in range(8))

    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.insert(0, ("cython", _kernels))
    else:
        print("compiled kernels not built; benchmarking the fallback only")

    frames = {name: k.enu_frame(37.875, -122.259, 30.0) for name, k in backends}
    results = {}
    print(f"\nround-trip transforms (n={n}):")
    for name, k in backends:
        results[name] = bench(name, transform_loop(k, frames[name], points), n)
    if len(results) == 2:
        print(f"  speedup: {results['python'] / results['cython']:.1f}x")

    results = {}
    print(f"\npoint-source rate, 8 sources (n={n}):")
    for name, k in backends:
        results[name] = bench(name, rate_loop(k, sources, points), n)
    if len(results) == 2:
        print(f"  speedup: {results['python'] / results['cython']:.1f}x")

    if _kernels is not None:
        worst = 0.0
        for e, nn, u in points[:200]:
            a = _kernels.enu_to_geodetic(e, nn, u, frames["cython"])
            b = _kernels_py.enu_to_geodetic(e, nn, u, frames["python"])
            worst = max(worst, abs(a[0] - b[0]) * 111_320, abs(a[1] - b[1]) * 111_320,
                        abs(a[2] - b[2]))
            ra = _kernels.point_rate(e, nn, u, sources, 0.5, 0.3)
            rb = _kernels_py.point_rate(e, nn, u, sources, 0.5, 0.3)
            worst = max(worst, abs(ra - rb))
        print(f"\nbackend agreement: worst divergence {worst:.3e} (m / counts-per-s)")
        assert worst < 1e-7

    print("\nfull headless mission (1200 ticks):")
    start = time.perf_counter()
    mission_run(0)
    backend = __import__("radnav").KERNEL_BACKEND
    print(f"  selected backend ({backend})   {(time.perf_counter() - start) * 1e3:8.1f} ms")


if __name__ == "__main__":
    main()
