"""Server tests: scenario parsing, command handling, log/replay, network layer."""
import asyncio
import base64
import hashlib
import json
import os
import secrets

import pytest

from radnav import protocol
from radnav.mission import MissionPhase
from radnav.scenario import ConfigInvalid, from_dict, load_scenario
from radnav.server import (
    BindFailure,
    CorruptLog,
    GroundStation,
    MissionLog,
    NetworkServer,
    replay_log,
)

BASE_DOC = {
    "name": "test",
    "seed": 7,
    "origin": {"lat": 37.875, "lon": -122.259, "alt": 30.0},
    "drone": {},
    "field": {"background": 0.5},
    "grid": {},
    "mission": {},
}


def make_config(**overrides):
    doc = json.loads(json.dumps(BASE_DOC))
    for key, value in overrides.items():
        if isinstance(value, dict) and key in doc:
            doc[key].update(value)
        else:
            doc[key] = value
    return from_dict(doc)


def autostart_config(waypoints, **overrides):
    return make_config(mission={"autostart": True, "waypoint": waypoints}, **overrides)


def wire_waypoint(wp_id, lat, lon, alt, hold=0.0):
    return {"id": wp_id, "lat": lat, "lon": lon, "alt": alt, "hold_s": hold}


def command(seq, kind, payload):
    return protocol.Envelope.make(seq, kind, 0.0, payload)


class TestScenario:
    def test_toml_round_trip(self, tmp_path):
        text = """
name = "demo"
seed = 42
tick_dt_s = 0.1
telemetry_hz = 10.0
measurement_hz = 2.0

[origin]
lat = 37.875
lon = -122.259
alt = 30.0

[drone]
max_speed_mps = 4.0
rtk_noise_sigma_m = 0.02
start_position = [0.0, 0.0, 0.0]

[[drone.gps_window]]
start_s = 10.0
end_s = 20.0
quality = "RTK_FLOAT"

[field]
background = 0.5
clamp_epsilon = 0.3

[[field.source]]
east = 50.0
north = 50.0
up = 0.0
strength = 60000.0

[grid]
resolution = 2.0
dims = [100, 100, 30]

[mission]
autostart = true

[[mission.waypoint]]
east = 10.0
north = 0.0
up = 10.0
hold_s = 1.0
"""
        path = tmp_path / "demo.toml"
        path.write_text(text)
        cfg = load_scenario(path)
        assert cfg.name == "demo"
        assert cfg.seed == 42
        assert cfg.drone.max_speed_mps == 4.0
        assert len(cfg.field_model.sources) == 1
        assert cfg.autostart and len(cfg.mission_waypoints) == 1
        assert cfg.gps_windows[0].quality.value == "RTK_FLOAT"

    def test_config_errors_name_field(self, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text("[origin]\nlat = 200.0\nlon = 0.0\n")
        with pytest.raises(ConfigInvalid):
            load_scenario(bad)
        with pytest.raises(ConfigInvalid) as err:
            from_dict({"origin": {"lon": 0.0}})
        assert "origin.lat" in str(err.value)
        with pytest.raises(ConfigInvalid) as err:
            from_dict({**BASE_DOC, "telemetry_hz": 100.0})
        assert "telemetry_hz" in str(err.value)

    def test_rate_guard_against_tick(self):
        with pytest.raises(ConfigInvalid):
            make_config(measurement_hz=11.0)  # > 1 / tick_dt_s


class TestCommands:
    def test_upload_start_ack_and_status(self):
        station = GroundStation(make_config())
        wp = wire_waypoint(1, 37.8751, -122.259, 40.0)
        reply = station.apply_command(command(1, "mission_upload", {"revision": 0, "waypoints": [wp]}))
        assert reply.t == "ack" and reply.payload["acked_seq"] == 1
        status = station.drain_broadcasts()[-1]
        assert status.t == "mission_status"
        assert status.payload["phase"] == "READY"
        assert status.payload["revision"] == 1
        reply = station.apply_command(command(2, "mission_start", {"revision": 1}))
        assert reply.t == "ack"
        assert station.state.phase is MissionPhase.ENROUTE

    def test_stale_revision_conflict(self):
        station = GroundStation(make_config())
        wp = wire_waypoint(1, 37.8751, -122.259, 40.0)
        station.apply_command(command(1, "mission_upload", {"revision": 0, "waypoints": [wp]}))
        reply = station.apply_command(command(2, "mission_upload", {"revision": 0, "waypoints": []}))
        assert reply.t == "error"
        assert reply.payload["code"] == "revision_conflict"
        assert reply.payload["cause_seq"] == 2

    def test_empty_plan_start(self):
        station = GroundStation(make_config())
        reply = station.apply_command(command(1, "mission_start", {"revision": 0}))
        assert reply.t == "error" and reply.payload["code"] == "empty_plan"

    def test_edit_behind_cursor_surfaced(self):
        station = GroundStation(
            autostart_config([
                {"east": 5.0, "north": 0.0, "up": 10.0},
                {"east": 10.0, "north": 0.0, "up": 10.0},
            ])
        )
        active_id = station.plan.waypoints[0].id
        reply = station.apply_command(
            command(1, "waypoint_update",
                    {"revision": 0, "waypoint": wire_waypoint(active_id, 37.875, -122.259, 45.0)})
        )
        assert reply.t == "error" and reply.payload["code"] == "edit_behind_cursor"

    def test_failed_command_leaves_state_unchanged(self):
        station = GroundStation(make_config())
        wp = wire_waypoint(1, 37.8751, -122.259, 40.0)
        station.apply_command(command(1, "mission_upload", {"revision": 0, "waypoints": [wp]}))
        station.drain_broadcasts()
        before = (station.plan, station.state, station.digest_json())
        for bad in (
            command(2, "waypoint_remove", {"revision": 99, "id": 1}),
            command(3, "waypoint_remove", {"revision": 1, "id": 42}),
            command(4, "mission_upload", {"revision": 1, "waypoints": [
                wire_waypoint(1, 91.0, 0.0, 0.0)]}),
        ):
            reply = station.apply_command(bad)
            assert reply.t == "error"
            assert station.plan == before[0]
            assert station.state == before[1]
        assert not station.drain_broadcasts()

    def test_update_future_waypoint_acked_with_new_revision(self):
        station = GroundStation(
            autostart_config([
                {"east": 5.0, "north": 0.0, "up": 10.0},
                {"east": 10.0, "north": 0.0, "up": 10.0},
            ])
        )
        future_id = station.plan.waypoints[1].id
        reply = station.apply_command(
            command(1, "waypoint_update",
                    {"revision": 0, "waypoint": wire_waypoint(future_id, 37.8752, -122.2589, 42.0)})
        )
        assert reply.t == "ack"
        status = station.drain_broadcasts()[-1]
        assert status.payload["revision"] == 1

    def test_abort_always_allowed(self):
        station = GroundStation(autostart_config([{"east": 5.0, "north": 0.0, "up": 10.0}]))
        reply = station.apply_command(command(1, "mission_abort", {}))
        assert reply.t == "ack"
        assert station.state.phase is MissionPhase.ABORTED

    def test_unsupported_kind(self):
        station = GroundStation(make_config())
        reply = station.apply_command(
            command(1, "telemetry",
                    {"lat": 0.0, "lon": 0.0, "alt": 0.0, "battery_pct": 1.0,
                     "gps_quality": "NONE", "mode": "GROUNDED"})
        )
        assert reply.t == "error" and reply.payload["code"] == "unsupported"


class TestSimulationLoop:
    def test_single_waypoint_completes_on_time(self):
        station = GroundStation(autostart_config([{"east": 10.0, "north": 0.0, "up": 0.0}]))
        while station.state.phase is not MissionPhase.COMPLETED and station.tick_index < 1000:
            station.advance_tick()
        assert station.state.phase is MissionPhase.COMPLETED
        assert 2.0 <= station.sim_time_s <= 4.0  # 3 +/- 1 s for 10 m at defaults

    def test_gps_window_applied(self):
        cfg = autostart_config(
            [{"east": 200.0, "north": 0.0, "up": 10.0}],
            drone={"gps_window": [{"start_s": 1.0, "end_s": 2.0, "quality": "GPS_ONLY"}]},
        )
        station = GroundStation(cfg)
        seen = set()
        for _ in range(30):
            station.advance_tick()
            seen.add(station.drone.gps_quality.value)
        assert seen == {"RTK_FIXED", "GPS_ONLY"}

    def test_battery_fault_aborts_mission(self):
        cfg = autostart_config(
            [{"east": 500.0, "north": 0.0, "up": 10.0}],
            drone={"battery_drain_pct_per_s": 50.0},
        )
        station = GroundStation(cfg)
        for _ in range(50):
            station.advance_tick()
        assert station.drone.mode.value == "LANDED_FAULT"
        assert station.state.phase is MissionPhase.ABORTED

    def test_hold_time_respected(self):
        cfg = autostart_config([
            {"east": 3.0, "north": 0.0, "up": 0.0, "hold_s": 2.0},
            {"east": 6.0, "north": 0.0, "up": 0.0},
        ])
        station = GroundStation(cfg)
        holding_ticks = 0
        while station.state.phase is not MissionPhase.COMPLETED and station.tick_index < 2000:
            station.advance_tick()
            if station.state.phase is MissionPhase.HOLDING:
                holding_ticks += 1
        assert station.state.phase is MissionPhase.COMPLETED
        assert holding_ticks == 20  # 2 s at dt=0.1

    def test_measurements_fused_and_broadcast(self):
        cfg = autostart_config(
            [{"east": 5.0, "north": 5.0, "up": 10.0, "hold_s": 10.0}],
            field={"background": 20.0},
        )
        station = GroundStation(cfg)
        kinds = []
        for _ in range(300):
            kinds += [env.t for env in station.advance_tick()]
        assert kinds.count("rad_measurement") == 60  # 2 Hz over 30 s
        assert "mesh_delta" in kinds
        assert station.grid.observed_count() >= 1


class TestLogAndReplay:
    def run_with_log(self, tmp_path, name="run.jsonl", commands_at=()):
        cfg = autostart_config([
            {"east": 8.0, "north": 0.0, "up": 5.0},
            {"east": 8.0, "north": 8.0, "up": 5.0, "hold_s": 1.0},
        ])
        path = tmp_path / name
        log = MissionLog(path, cfg)
        station = GroundStation(cfg, log)
        schedule = dict(commands_at)
        for tick in range(400):
            for env in schedule.get(tick, []):
                station.apply_command(env)
            station.advance_tick()
        log.close(station.tick_index)
        return path, station.digest()

    def test_replay_reproduces_digest(self, tmp_path):
        add = command(5, "waypoint_add",
                      {"revision": 0, "waypoint": wire_waypoint(0, 37.8752, -122.2591, 38.0)})
        path, digest = self.run_with_log(tmp_path, commands_at={37: [add]})
        assert replay_log(path) == digest
        assert replay_log(path) == digest  # replay twice -> identical

    def test_replayed_commands_affect_state(self, tmp_path):
        add = command(5, "waypoint_add",
                      {"revision": 0, "waypoint": wire_waypoint(0, 37.8752, -122.2591, 38.0)})
        path, digest = self.run_with_log(tmp_path, commands_at={37: [add]})
        assert len(digest["visited"]) == 3
        assert digest["messages"]["command_in"] == 1

    def test_truncated_log_detected(self, tmp_path):
        path, _ = self.run_with_log(tmp_path)
        data = path.read_bytes()
        truncated = tmp_path / "truncated.jsonl"
        truncated.write_bytes(data[:-30])
        with pytest.raises(CorruptLog):
            replay_log(truncated)

    def test_garbage_line_reports_number(self, tmp_path):
        path, _ = self.run_with_log(tmp_path)
        lines = path.read_bytes().splitlines()
        lines[3] = b"{ nope"
        bad = tmp_path / "bad.jsonl"
        bad.write_bytes(b"\n".join(lines) + b"\n")
        with pytest.raises(CorruptLog) as err:
            replay_log(bad)
        assert err.value.line_number == 4

    def test_log_contains_every_broadcast_once_in_order(self, tmp_path):
        path, digest = self.run_with_log(tmp_path)
        records = [json.loads(line) for line in path.read_text().splitlines()]
        assert records[0]["kind"] == "header"
        assert records[-1]["kind"] == "end"
        body = records[1:-1]
        ticks = [r["tick"] for r in body]
        assert ticks == sorted(ticks)
        by_kind = {}
        seqs = []
        for r in body:
            by_kind[r["kind"]] = by_kind.get(r["kind"], 0) + 1
            seqs.append(r["env"]["seq"])
        assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)
        assert by_kind["telemetry"] == digest["messages"]["telemetry"]
        assert by_kind["measurement"] == digest["messages"]["rad_measurement"]
        assert by_kind["status_change"] == digest["messages"]["mission_status"]
        assert by_kind.get("mesh_delta", 0) == digest["messages"]["mesh_delta"]

    def test_two_runs_byte_identical(self, tmp_path):
        path_a, _ = self.run_with_log(tmp_path, "a.jsonl")
        path_b, _ = self.run_with_log(tmp_path, "b.jsonl")
        assert path_a.read_bytes() == path_b.read_bytes()


async def line_client(port):
    reader, writer = await asyncio.open_connection("127.0.0.1", port)
    return reader, writer


async def send_line(writer, env):
    writer.write(protocol.encode(env) + b"\n")
    await writer.drain()


async def read_envelope(reader):
    line = await asyncio.wait_for(reader.readline(), timeout=5.0)
    return protocol.decode(line.rstrip(b"\n"))


async def wait_for_kind(reader, kind):
    for _ in range(500):
        env = await read_envelope(reader)
        if env.t == kind:
            return env
    raise AssertionError(f"never saw {kind}")


class TestNetwork:
    def test_tcp_session_round_trip(self):
        async def scenario():
            # wall-clock paced: commands and replies interleave with the
            # tick loop the way a live operator session does; the test
            # stops the loop explicitly when done
            server = NetworkServer(make_config(), port=0, headless=False)
            await server.start()
            loop_task = asyncio.create_task(server.run_loop())
            reader, writer = await line_client(server.port)
            await send_line(writer, protocol.Envelope.make(1, "hello", 0.0,
                                                           {"role": "operator", "name": "t"}))
            hello = await wait_for_kind(reader, "hello")
            assert hello.payload["role"] == "drone"
            assert hello.payload["origin"]["lat"] == pytest.approx(37.875)
            status = await wait_for_kind(reader, "mission_status")
            assert status.payload["phase"] == "IDLE"
            await send_line(writer, protocol.Envelope.make(
                2, "mission_upload",
                0.0, {"revision": 0, "waypoints": [wire_waypoint(1, 37.8751, -122.259, 35.0)]}))
            ack = await wait_for_kind(reader, "ack")
            assert ack.payload["acked_seq"] == 2
            await send_line(writer, protocol.Envelope.make(3, "mission_start", 0.0, {"revision": 1}))
            await wait_for_kind(reader, "ack")
            status = await wait_for_kind(reader, "mission_status")
            assert status.payload["phase"] == "ENROUTE"
            telemetry = await wait_for_kind(reader, "telemetry")
            assert 0.0 <= telemetry.payload["battery_pct"] <= 100.0
            writer.close()
            server.stop()
            digest = await loop_task
            assert digest["messages"]["command_in"] == 2

        asyncio.run(scenario())

    def test_per_connection_seq_gapless(self):
        async def scenario():
            server = NetworkServer(
                autostart_config([{"east": 5.0, "north": 0.0, "up": 5.0}]),
                port=0, headless=True,
            )
            await server.start()
            loop_task = asyncio.create_task(server.run_loop())
            reader, writer = await line_client(server.port)
            await send_line(writer, protocol.Envelope.make(1, "hello", 0.0,
                                                           {"role": "operator", "name": "t"}))
            tracker = protocol.SessionTracker()
            for _ in range(40):
                env = await read_envelope(reader)
                assert tracker.accept(env) is protocol.Acceptance.ACCEPT
            writer.close()
            server.stop()
            await loop_task

        asyncio.run(scenario())

    def test_malformed_input_gets_error_envelope(self):
        async def scenario():
            server = NetworkServer(make_config(), port=0, headless=True, max_sim_s=30.0)
            await server.start()
            loop_task = asyncio.create_task(server.run_loop())
            reader, writer = await line_client(server.port)
            writer.write(b"this is not json\n")
            await writer.drain()
            err = await wait_for_kind(reader, "error")
            assert err.payload["code"] == "malformed"
            writer.write(b'{"v":1,"seq":1,"t":"ack","ts":0.0,"payload":{}}\n')
            await writer.drain()
            err = await wait_for_kind(reader, "error")
            assert err.payload["code"] == "schema_violation"
            writer.close()
            server.stop()
            await loop_task

        asyncio.run(scenario())

    def test_websocket_session(self):
        async def scenario():
            server = NetworkServer(make_config(), port=0, headless=True, max_sim_s=30.0)
            await server.start()
            loop_task = asyncio.create_task(server.run_loop())
            reader, writer = await asyncio.open_connection("127.0.0.1", server.port)
            key = base64.b64encode(secrets.token_bytes(16))
            writer.write(
                b"GET / HTTP/1.1\r\nHost: x\r\nUpgrade: websocket\r\n"
                b"Connection: Upgrade\r\nSec-WebSocket-Key: " + key + b"\r\n"
                b"Sec-WebSocket-Version: 13\r\n\r\n"
            )
            await writer.drain()
            response = await reader.readuntil(b"\r\n\r\n")
            assert b"101 Switching Protocols" in response
            expected = base64.b64encode(
                hashlib.sha1(key + b"258EAFA5-E914-47DA-95CA-C5AB0DC85B11").digest()
            )
            assert expected in response

            def client_frame(payload):
                mask = secrets.token_bytes(4)
                masked = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
                header = bytes([0x81])
                n = len(payload)
                if n < 126:
                    header += bytes([0x80 | n])
                else:
                    header += bytes([0x80 | 126]) + n.to_bytes(2, "big")
                return header + mask + masked

            hello = protocol.encode(
                protocol.Envelope.make(1, "hello", 0.0, {"role": "operator", "name": "ws"}))
            writer.write(client_frame(hello))
            await writer.drain()

            async def read_ws():
                header = await reader.readexactly(2)
                length = header[1] & 0x7F
                if length == 126:
                    length = int.from_bytes(await reader.readexactly(2), "big")
                elif length == 127:
                    length = int.from_bytes(await reader.readexactly(8), "big")
                return await reader.readexactly(length)

            env = protocol.decode(await read_ws())
            assert env.t == "hello" and env.payload["role"] == "drone"
            env = protocol.decode(await read_ws())
            assert env.t == "mission_status"
            writer.close()
            server.stop()
            await loop_task

        asyncio.run(scenario())

    def test_simulation_advances_without_clients(self, tmp_path):
        async def scenario():
            log_path = tmp_path / "noclients.jsonl"
            server = NetworkServer(
                autostart_config([{"east": 5.0, "north": 0.0, "up": 5.0}]),
                port=0, headless=True, log_path=str(log_path), max_sim_s=10.0,
            )
            await server.start()
            digest = await server.run_loop()
            assert digest["phase"] == "COMPLETED"
            assert digest["ticks"] == 100
            assert log_path.exists()
            assert replay_log(log_path) == digest

        asyncio.run(scenario())

    def test_bind_failure(self):
        async def scenario():
            server = NetworkServer(make_config(), port=0, headless=True)
            await server.start()
            with pytest.raises(BindFailure):
                other = NetworkServer(make_config(), port=server.port, headless=True)
                await other.start()
            server._server.close()

        asyncio.run(scenario())
