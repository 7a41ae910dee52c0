"""Record a broadcast stream + state digest for the console test suite.

Runs a deterministic mission through the real ground station and dumps
exactly what a console connected from t=0 would receive: the hello
reply, then every broadcast envelope in order. The companion digest
captures the server's final state so the console tests can check that
replaying the stream reconstructs it.

    python tools/record-fixture.py   (from frontend/; rewrites fixtures/)
"""
import json
import pathlib
import sys

from radnav.geodesy import GeodeticCoordinate, to_local
from radnav.mission import MissionPhase
from radnav.scenario import from_dict
from radnav.server import GroundStation
from radnav import protocol

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

DOC = {
    "name": "console-fixture",
    "seed": 777,
    "origin": {"lat": 37.875, "lon": -122.259, "alt": 30.0},
    "drone": {"start_position": [0.0, 0.0, 0.0]},
    "field": {
        "background": 1.0,
        "source": [{"east": 20.0, "north": 14.0, "up": 0.0, "strength": 30000.0}],
    },
    "grid": {},
    "mission": {
        "autostart": True,
        "waypoint": [
            {"east": 20.0, "north": 0.0, "up": 10.0},
            {"east": 20.0, "north": 28.0, "up": 10.0, "hold_s": 3.0},
            {"east": -10.0, "north": 28.0, "up": 12.0},
        ],
    },
}

TICKS = 600  # 60 s; divisible by every cadence so the last mesh delta flushes


def main():
    cfg = from_dict(DOC)
    station = GroundStation(cfg)
    stream = [protocol.Envelope.make(0, "hello", 0.0, station.hello_payload())]
    stream += station.drain_broadcasts()  # autostart status
    for _ in range(TICKS):
        stream += station.advance_tick()
    assert station.state.phase is MissionPhase.COMPLETED

    last_telemetry = next(e for e in reversed(stream) if e.t == "telemetry")
    drone_enu = to_local(
        station.origin,
        GeodeticCoordinate(
            last_telemetry.payload["lat"],
            last_telemetry.payload["lon"],
            last_telemetry.payload["alt"],
        ),
    )
    digest = {
        "phase": station.state.phase.value,
        "revision": station.plan.revision,
        "visited": list(station.state.visited),
        "waypoints": station.status_payload()["waypoints"],
        "last_telemetry": {
            "lat": last_telemetry.payload["lat"],
            "lon": last_telemetry.payload["lon"],
            "alt": last_telemetry.payload["alt"],
        },
        "drone_enu": [drone_enu.east_m, drone_enu.north_m, drone_enu.up_m],
        "observed_voxels": station.grid.observed_count(),
        "grid_revision": station.grid.revision,
        "message_counts": dict(station.message_counts),
    }

    FIXTURES.mkdir(exist_ok=True)
    with open(FIXTURES / "session.jsonl", "wb") as fh:
        for env in stream:
            fh.write(protocol.encode(env) + b"\n")
    (FIXTURES / "session-digest.json").write_text(json.dumps(digest, indent=1) + "\n")

    golden_src = pathlib.Path(__file__).resolve().parents[2] / "tests" / "golden" / "frames.jsonl"
    (FIXTURES / "golden-frames.jsonl").write_bytes(golden_src.read_bytes())
    print(f"{len(stream)} envelopes, {digest['observed_voxels']} voxels, "
          f"phase {digest['phase']}, visited {digest['visited']}")


if __name__ == "__main__":
    sys.exit(main())
