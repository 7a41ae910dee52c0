"""Ground-station process: simulation loop, command handling, log, replay.

One fixed-timestep loop owns every piece of mutable state (drone,
mission, voxel grid, RNG). Network sessions only enqueue decoded
operator commands and dequeue broadcast snapshots; commands are applied
at tick boundaries in arrival order, which gives every run a total
order of events. Given (config, seed, commands-with-tick-stamps) the
entire broadcast stream and the final grid checksum are reproducible
byte for byte, and the JSONL mission log captures exactly that triple,
so `replay` can re-run any log and must land on the identical digest.

Tick procedure (order is part of the determinism contract):
  1. apply queued operator commands (logged as command_in at this tick)
  2. step the drone toward the active waypoint (or to a hover)
  3. apply scripted GPS quality, resolve arrivals/holds/faults
  4. advance the tick counter; emit telemetry / measurement / mesh
     delta at their cadences (each consumes RNG in a fixed order)

Broadcast envelopes carry the logical stream's sequence numbers and are
logged once; each connection re-stamps its own per-connection sequence
so every client sees a gapless stream regardless of join time.
"""
import asyncio
import base64
import hashlib
import json
import os
import time
from dataclasses import replace

import numpy as np

from radnav import flight, mission, protocol
from radnav.geodesy import GeodeticCoordinate, GeoOrigin, InvalidCoordinate, to_local
from radnav.mission import (
    AlreadyRunning,
    EditBehindCursor,
    EmptyPlan,
    InvalidPosition,
    MissionPhase,
    MissionPlan,
    MissionState,
    UnknownWaypoint,
    Waypoint,
)
from radnav.radiation import RadiationMeasurement, expected_rate
from radnav.scenario import ScenarioConfig, from_dict, gps_quality_at, to_dict
from radnav.voxmap import ColormapSpec, VoxelGrid, colorize

LOG_VERSION = 1

_LOG_KIND_BY_MESSAGE = {
    "telemetry": "telemetry",
    "rad_measurement": "measurement",
    "mesh_delta": "mesh_delta",
    "mission_status": "status_change",
}


class BindFailure(OSError):
    pass


class CorruptLog(Exception):
    def __init__(self, line_number, detail):
        super().__init__(f"line {line_number}: {detail}")
        self.line_number = line_number


class MissionLog:
    """Append-only JSONL sink with deterministic bytes.

    First line is a header embedding the full config; the final line is
    an end record with the tick count, which doubles as a truncation
    check for replay.
    """

    def __init__(self, path, config: ScenarioConfig):
        self.path = path
        self._fh = open(path, "wb")
        header = {
            "tick": 0,
            "kind": "header",
            "version": LOG_VERSION,
            "config": to_dict(config),
        }
        self._fh.write(json.dumps(header, separators=(",", ":"), sort_keys=True).encode() + b"\n")

    def record(self, tick: int, kind: str, env: protocol.Envelope):
        line = b'{"tick":%d,"kind":"%s","env":' % (tick, kind.encode())
        self._fh.write(line + protocol.encode(env) + b"}\n")

    def close(self, ticks: int):
        self._fh.write(b'{"tick":%d,"kind":"end","ticks":%d}\n' % (ticks, ticks))
        self._fh.close()


class GroundStation:
    """Deterministic simulation core; owns all mutable mission state."""

    def __init__(self, config: ScenarioConfig, log: MissionLog | None = None):
        self.config = config
        self.log = log
        self.origin = GeoOrigin(config.origin)
        self.drone = flight.initial_state(config.drone)
        self.plan = MissionPlan(config.mission_waypoints, revision=0)
        self.state = MissionState(
            phase=MissionPhase.READY if config.mission_waypoints else MissionPhase.IDLE
        )
        self.grid = VoxelGrid(
            config.grid.origin_enu(), config.grid.resolution_m, config.grid.dims
        )
        self.colormap = ColormapSpec()
        self.rng = np.random.Generator(np.random.PCG64(config.seed))
        self.tick_index = 0
        self.message_counts = {
            "telemetry": 0, "rad_measurement": 0, "mesh_delta": 0,
            "mission_status": 0, "command_in": 0,
        }
        self._seq = 0
        self._mesh_pushed_rev = 0
        self._telemetry_ticks = config.interval_ticks(config.telemetry_hz)
        self._measurement_ticks = config.interval_ticks(config.measurement_hz)
        self._mesh_ticks = config.interval_ticks(config.mesh_delta_hz)
        self._pending_broadcasts = []
        if config.autostart and len(self.plan):
            self.state = mission.start(self.plan, self.state)
            self._broadcast_status()

    # -- helpers ------------------------------------------------------------

    @property
    def sim_time_s(self) -> float:
        return self.tick_index * self.config.tick_dt_s

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def _emit(self, kind: str, payload: dict):
        env = protocol.Envelope.make(self._next_seq(), kind, self.sim_time_s, payload)
        self.message_counts[kind] += 1
        if self.log is not None:
            self.log.record(self.tick_index, _LOG_KIND_BY_MESSAGE[kind], env)
        self._pending_broadcasts.append(env)

    def _broadcast_status(self):
        self._emit("mission_status", self.status_payload())

    def status_payload(self) -> dict:
        """Authoritative mission snapshot, including the full waypoint list
        so late-joining consoles can hydrate their scene."""
        payload = {
            "phase": self.state.phase.value,
            "visited_ids": list(self.state.visited),
            "revision": self.plan.revision,
            "waypoints": [
                {
                    "id": w.id,
                    "lat": w.position.latitude_deg,
                    "lon": w.position.longitude_deg,
                    "alt": w.position.altitude_m,
                    "hold_s": w.hold_time_s,
                    **({"speed_mps": w.speed_override_mps}
                       if w.speed_override_mps is not None else {}),
                }
                for w in self.plan.waypoints
            ],
        }
        if self.state.active_index is not None:
            payload["active_index"] = self.state.active_index
        return payload

    def hello_payload(self) -> dict:
        """Connection greeting: everything a console needs to build its
        scene frame (geodetic origin and voxel-grid geometry)."""
        return {
            "role": "drone",
            "name": self.config.name,
            "origin": {
                "lat": self.config.origin.latitude_deg,
                "lon": self.config.origin.longitude_deg,
                "alt": self.config.origin.altitude_m,
            },
            "grid": {
                "resolution": self.grid.resolution_m,
                "min_corner": list(self.grid.origin_enu.as_tuple()),
                "dims": list(self.grid.dims),
            },
        }

    # -- operator commands ----------------------------------------------------

    def apply_command(self, env: protocol.Envelope) -> protocol.Envelope:
        """Apply one decoded operator command at the current tick boundary.

        Returns the reply (ack or error, seq 0: the connection re-stamps).
        A failed command provably leaves plan, state and revision
        untouched; a successful mutation also queues a status broadcast.
        """
        self.message_counts["command_in"] += 1
        if self.log is not None:
            self.log.record(self.tick_index, "command_in", env)
        try:
            changed = self._dispatch_command(env)
        except _CommandError as exc:
            payload = {"code": exc.code, "detail": exc.detail, "cause_seq": env.seq}
            return protocol.Envelope.make(0, "error", self.sim_time_s, payload)
        if changed:
            self._broadcast_status()
        return protocol.Envelope.make(0, "ack", self.sim_time_s, {"acked_seq": env.seq})

    def _dispatch_command(self, env: protocol.Envelope) -> bool:
        kind = env.t
        payload = env.payload
        if kind == "mission_abort":
            self.state = mission.abort(self.state)
            return True
        if kind not in ("mission_upload", "waypoint_add", "waypoint_update",
                        "waypoint_remove", "mission_start"):
            raise _CommandError("unsupported", f"{kind} is not an operator command")
        if payload["revision"] != self.plan.revision:
            raise _CommandError(
                "revision_conflict",
                f"plan revision is {self.plan.revision}, command stated {payload['revision']}",
            )
        try:
            if kind == "mission_upload":
                waypoints = [self._wire_waypoint(w) for w in payload["waypoints"]]
                self.plan = mission.replace_plan(self.plan, self.state, waypoints)
                self.state = MissionState(
                    phase=MissionPhase.READY if waypoints else MissionPhase.IDLE
                )
            elif kind == "waypoint_add":
                wire = payload["waypoint"]
                self.plan = mission.add_waypoint(
                    self.plan,
                    GeodeticCoordinate(wire["lat"], wire["lon"], wire["alt"]),
                    hold_time_s=wire["hold_s"],
                    insert_index=payload.get("index"),
                    state=self.state,
                    speed_override_mps=wire.get("speed_mps"),
                )
            elif kind == "waypoint_update":
                wire = payload["waypoint"]
                self.plan = mission.update_waypoint(
                    self.plan,
                    self.state,
                    wire["id"],
                    position=GeodeticCoordinate(wire["lat"], wire["lon"], wire["alt"]),
                    hold_time_s=wire["hold_s"],
                    speed_override_mps=wire.get("speed_mps"),
                )
            elif kind == "waypoint_remove":
                self.plan = mission.remove_waypoint(self.plan, self.state, payload["id"])
            elif kind == "mission_start":
                self.state = mission.start(self.plan, self.state)
        except EditBehindCursor as exc:
            raise _CommandError("edit_behind_cursor", str(exc)) from exc
        except UnknownWaypoint as exc:
            raise _CommandError("unknown_waypoint", str(exc)) from exc
        except EmptyPlan as exc:
            raise _CommandError("empty_plan", str(exc)) from exc
        except AlreadyRunning as exc:
            raise _CommandError("already_running", str(exc)) from exc
        except (InvalidPosition, InvalidCoordinate) as exc:
            raise _CommandError("invalid_position", str(exc)) from exc
        return True

    def _wire_waypoint(self, wire: dict) -> Waypoint:
        return Waypoint(
            id=wire["id"],
            position=GeodeticCoordinate(wire["lat"], wire["lon"], wire["alt"]),
            hold_time_s=wire["hold_s"],
            speed_override_mps=wire.get("speed_mps"),
        )

    # -- simulation ---------------------------------------------------------

    def advance_tick(self) -> list:
        """Run one tick; returns the broadcast envelopes it produced."""
        cfg = self.config
        dt = cfg.tick_dt_s
        t_next = (self.tick_index + 1) * dt

        wp = mission.active_waypoint(self.plan, self.state)
        target = to_local(self.origin, wp.position) if wp is not None else None
        speed_limit = wp.speed_override_mps if wp is not None else None
        self.drone = flight.step(self.drone, cfg.drone, target, dt, speed_limit)
        quality = gps_quality_at(cfg, t_next)
        if self.drone.gps_quality is not quality:
            self.drone = replace(self.drone, gps_quality=quality)

        status_changed = False
        if self.state.phase is MissionPhase.ENROUTE and target is not None and flight.arrived(
            self.drone, cfg.drone, target
        ):
            self.state = mission.on_arrival(self.state, self.plan, t_next)
            status_changed = True
        elif self.state.phase is MissionPhase.HOLDING:
            new_state = mission.poll_hold(self.state, self.plan, t_next)
            status_changed = new_state != self.state
            self.state = new_state
        if self.drone.mode is flight.FlightMode.LANDED_FAULT and self.state.running:
            self.state = mission.abort(self.state)
            status_changed = True

        self.tick_index += 1
        if status_changed:
            self._broadcast_status()

        active_id = wp.id if wp is not None else None
        if self.tick_index % self._telemetry_ticks == 0:
            tel = flight.emit_telemetry(
                self.drone, cfg.drone, self.origin, self.rng, self.sim_time_s, active_id
            )
            payload = {
                "lat": tel.reported_position.latitude_deg,
                "lon": tel.reported_position.longitude_deg,
                "alt": tel.reported_position.altitude_m,
                "battery_pct": tel.battery_pct,
                "gps_quality": tel.gps_quality.value,
                "mode": tel.mode.value,
            }
            if tel.active_waypoint_id is not None:
                payload["active_waypoint_id"] = tel.active_waypoint_id
            self._emit("telemetry", payload)

        if self.tick_index % self._measurement_ticks == 0:
            self._sample_measurement()

        if self.tick_index % self._mesh_ticks == 0:
            delta = self.grid.delta_since(self._mesh_pushed_rev)
            if delta:
                voxels = [
                    {
                        "ix": ix, "iy": iy, "iz": iz,
                        "rate": rate, "exposure_s": exposure,
                        "rgba": list(colorize(self.colormap, rate)),
                    }
                    for (ix, iy, iz), rate, exposure in delta
                ]
                self._mesh_pushed_rev = self.grid.revision
                self._emit("mesh_delta", {"grid_revision": self.grid.revision, "voxels": voxels})

        out = self._pending_broadcasts
        self._pending_broadcasts = []
        return out

    def drain_broadcasts(self) -> list:
        """Broadcasts queued outside advance_tick (e.g. by commands)."""
        out = self._pending_broadcasts
        self._pending_broadcasts = []
        return out

    def _sample_measurement(self):
        cfg = self.config
        noise = self.rng.normal(0.0, cfg.drone.rtk_noise_sigma_m, 3)
        p = self.drone.true_position
        from radnav.geodesy import LocalEnu, to_geodetic

        noisy = LocalEnu(p.east_m + noise[0], p.north_m + noise[1], p.up_m + noise[2])
        dt_meas = self._measurement_ticks * cfg.tick_dt_s
        rate = expected_rate(cfg.field_model, noisy)
        counts = int(self.rng.poisson(rate * dt_meas))
        m = RadiationMeasurement(self.sim_time_s, noisy, counts, dt_meas)
        self.grid.insert_measurement(m)
        reported = to_geodetic(self.origin, noisy)
        self._emit(
            "rad_measurement",
            {
                "t_s": self.sim_time_s,
                "lat": reported.latitude_deg,
                "lon": reported.longitude_deg,
                "alt": reported.altitude_m,
                "counts": counts,
                "dt_s": dt_meas,
            },
        )

    # -- digest ---------------------------------------------------------------

    def digest(self) -> dict:
        return {
            "phase": self.state.phase.value,
            "visited": list(self.state.visited),
            "grid_sha256": self.grid.checksum(),
            "messages": dict(self.message_counts),
            "ticks": self.tick_index,
        }

    def digest_json(self) -> str:
        return json.dumps(self.digest(), separators=(",", ":"), sort_keys=True)


class _CommandError(Exception):
    def __init__(self, code, detail):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


# -- replay ---------------------------------------------------------------


def replay_log(path) -> dict:
    """Re-run a mission log through the deterministic loop; return the digest."""
    return replay_station(path).digest()


def replay_station(path) -> GroundStation:
    """Re-run a mission log and hand back the reconstructed station."""
    records = []
    with open(path, "rb") as fh:
        raw = fh.read().split(b"\n")
    if raw and raw[-1] == b"":
        raw.pop()
    for line_no, line in enumerate(raw, start=1):
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise CorruptLog(line_no, f"unparseable record: {exc.msg}") from exc
    if not records:
        raise CorruptLog(1, "empty log")
    header = records[0]
    if header.get("kind") != "header" or "config" not in header:
        raise CorruptLog(1, "missing header record")
    if header.get("version") != LOG_VERSION:
        raise CorruptLog(1, f"unsupported log version {header.get('version')}")
    end = records[-1]
    if end.get("kind") != "end" or "ticks" not in end:
        raise CorruptLog(len(records), "missing end record (log truncated?)")

    try:
        config = from_dict(header["config"])
    except Exception as exc:
        raise CorruptLog(1, f"bad embedded config: {exc}") from exc

    commands_by_tick = {}
    last_tick = 0
    for line_no, rec in enumerate(records[1:-1], start=2):
        kind = rec.get("kind")
        tick = rec.get("tick")
        if kind not in ("command_in", "telemetry", "measurement", "mesh_delta", "status_change"):
            raise CorruptLog(line_no, f"unknown record kind {kind!r}")
        if not isinstance(tick, int) or tick < last_tick:
            raise CorruptLog(line_no, f"tick {tick!r} not non-decreasing")
        last_tick = tick
        if kind == "command_in":
            try:
                env = protocol.decode(json.dumps(rec["env"], separators=(",", ":")))
            except (KeyError, protocol.ProtocolError) as exc:
                raise CorruptLog(line_no, f"bad command envelope: {exc}") from exc
            commands_by_tick.setdefault(tick, []).append(env)

    station = GroundStation(config, log=None)
    for tick in range(end["ticks"]):
        for env in commands_by_tick.get(tick, []):
            station.apply_command(env)
        station.advance_tick()
    return station


# -- network layer ----------------------------------------------------------

_WS_GUID = b"258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


class _Connection:
    """One client session: dual framing, per-connection seq, rx tracking."""

    def __init__(self, reader, writer):
        self.reader = reader
        self.writer = writer
        self.websocket = False
        self.tracker = protocol.SessionTracker()
        self.outbox = asyncio.Queue()
        self._tx_seq = 0
        self._buffer = b""

    def next_seq(self) -> int:
        self._tx_seq += 1
        return self._tx_seq

    async def handshake(self) -> bool:
        """Sniff the first bytes: HTTP GET means WebSocket, else line JSON."""
        head = await self.reader.read(4)
        if not head:
            return False
        if head == b"GET ":
            request = head
            while b"\r\n\r\n" not in request:
                chunk = await self.reader.read(1024)
                if not chunk:
                    return False
                request += chunk
                if len(request) > 65536:
                    return False
            headers = {}
            for line in request.split(b"\r\n")[1:]:
                if b":" in line:
                    key, _, value = line.partition(b":")
                    headers[key.strip().lower()] = value.strip()
            key = headers.get(b"sec-websocket-key")
            if key is None:
                self.writer.write(b"HTTP/1.1 400 Bad Request\r\n\r\n")
                await self.writer.drain()
                return False
            accept = base64.b64encode(hashlib.sha1(key + _WS_GUID).digest())
            self.writer.write(
                b"HTTP/1.1 101 Switching Protocols\r\n"
                b"Upgrade: websocket\r\nConnection: Upgrade\r\n"
                b"Sec-WebSocket-Accept: " + accept + b"\r\n\r\n"
            )
            await self.writer.drain()
            self.websocket = True
        else:
            self._buffer = head
        return True

    async def recv(self) -> bytes | None:
        """Next message payload, or None on EOF/close."""
        if self.websocket:
            return await self._recv_ws()
        while b"\n" not in self._buffer:
            chunk = await self.reader.read(4096)
            if not chunk:
                return None
            self._buffer += chunk
        line, _, self._buffer = self._buffer.partition(b"\n")
        return line

    async def _read_exact(self, n):
        data = b""
        while len(data) < n:
            chunk = await self.reader.read(n - len(data))
            if not chunk:
                raise ConnectionResetError("peer closed mid-frame")
            data += chunk
        return data

    async def _recv_ws(self) -> bytes | None:
        fragments = b""
        while True:
            try:
                header = await self._read_exact(2)
            except ConnectionResetError:
                return None
            fin = header[0] & 0x80
            opcode = header[0] & 0x0F
            masked = header[1] & 0x80
            length = header[1] & 0x7F
            if length == 126:
                length = int.from_bytes(await self._read_exact(2), "big")
            elif length == 127:
                length = int.from_bytes(await self._read_exact(8), "big")
            mask = await self._read_exact(4) if masked else b""
            payload = await self._read_exact(length)
            if masked:
                payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
            if opcode == 0x8:  # close
                await self._send_raw(self._ws_frame(0x8, b""))
                return None
            if opcode == 0x9:  # ping -> pong
                await self._send_raw(self._ws_frame(0xA, payload))
                continue
            if opcode == 0xA:  # pong
                continue
            fragments += payload
            if fin:
                return fragments

    @staticmethod
    def _ws_frame(opcode: int, payload: bytes) -> bytes:
        header = bytes([0x80 | opcode])
        n = len(payload)
        if n < 126:
            header += bytes([n])
        elif n < 65536:
            header += bytes([126]) + n.to_bytes(2, "big")
        else:
            header += bytes([127]) + n.to_bytes(8, "big")
        return header + payload

    async def _send_raw(self, data: bytes):
        self.writer.write(data)
        await self.writer.drain()

    async def send_envelope(self, env: protocol.Envelope):
        """Re-stamp with this connection's sequence and transmit."""
        frame = protocol.encode(replace(env, seq=self.next_seq()))
        if self.websocket:
            await self._send_raw(self._ws_frame(0x1, frame))
        else:
            await self._send_raw(frame + b"\n")


class NetworkServer:
    """Binds the ground station to a listening socket and paces the loop."""

    def __init__(self, config: ScenarioConfig, host="127.0.0.1", port=protocol.DEFAULT_PORT,
                 headless=False, log_path=None, max_sim_s=None):
        self.config = config
        self.host = host
        self.port = port
        self.headless = headless
        self.max_sim_s = max_sim_s
        self.log = MissionLog(log_path, config) if log_path else None
        self.station = GroundStation(config, self.log)
        self.connections = set()
        self.command_queue = asyncio.Queue()
        self._server = None
        self._stopping = asyncio.Event()

    async def start(self):
        try:
            self._server = await asyncio.start_server(self._on_client, self.host, self.port)
        except OSError as exc:
            raise BindFailure(f"cannot bind {self.host}:{self.port}: {exc}") from exc
        self.port = self._server.sockets[0].getsockname()[1]

    def stop(self):
        self._stopping.set()

    async def _on_client(self, reader, writer):
        conn = _Connection(reader, writer)
        try:
            if not await conn.handshake():
                return
            self.connections.add(conn)
            sender = asyncio.create_task(self._sender(conn))
            try:
                await self._receiver(conn)
            finally:
                sender.cancel()
                self.connections.discard(conn)
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            self.connections.discard(conn)
            writer.close()

    async def _sender(self, conn):
        while True:
            env = await conn.outbox.get()
            try:
                await conn.send_envelope(env)
            except (ConnectionError, RuntimeError):
                return

    async def _receiver(self, conn):
        while True:
            data = await conn.recv()
            if data is None:
                return
            if not data.strip():
                continue
            try:
                env = protocol.decode(data)
            except protocol.ProtocolError as exc:
                code = "malformed" if isinstance(exc, protocol.MalformedJson) else "schema_violation"
                conn.outbox.put_nowait(
                    protocol.Envelope.make(0, "error", self.station.sim_time_s,
                                           {"code": code, "detail": str(exc)})
                )
                continue
            if conn.tracker.accept(env) is protocol.Acceptance.DUPLICATE:
                continue
            if env.t == "hello":
                conn.outbox.put_nowait(
                    protocol.Envelope.make(0, "hello", self.station.sim_time_s,
                                           self.station.hello_payload())
                )
                conn.outbox.put_nowait(
                    protocol.Envelope.make(0, "mission_status", self.station.sim_time_s,
                                           self.station.status_payload())
                )
                continue
            self.command_queue.put_nowait((conn, env))

    def _fanout(self, envelopes):
        for env in envelopes:
            for conn in self.connections:
                conn.outbox.put_nowait(env)

    async def run_loop(self) -> dict:
        """Drive ticks until max_sim_s (or stop()); returns the digest."""
        dt = self.config.tick_dt_s
        self._fanout(self.station.drain_broadcasts())  # autostart status
        loop = asyncio.get_running_loop()
        next_deadline = loop.time() + dt
        try:
            while not self._stopping.is_set():
                if self.max_sim_s is not None and self.station.sim_time_s >= self.max_sim_s:
                    break
                while not self.command_queue.empty():
                    conn, env = self.command_queue.get_nowait()
                    reply = self.station.apply_command(env)
                    conn.outbox.put_nowait(reply)
                    self._fanout(self.station.drain_broadcasts())
                self._fanout(self.station.advance_tick())
                if self.headless:
                    if self.station.tick_index % 50 == 0:
                        await asyncio.sleep(0)
                else:
                    delay = next_deadline - loop.time()
                    next_deadline += dt
                    if delay > 0:
                        await asyncio.sleep(delay)
                    else:
                        await asyncio.sleep(0)
        finally:
            if self.log is not None:
                self.log.close(self.station.tick_index)
            if self._server is not None:
                self._server.close()
                # give in-flight sends a chance to flush
                await asyncio.sleep(0)
        return self.station.digest()


async def run_server(config, host="127.0.0.1", port=protocol.DEFAULT_PORT, headless=False,
                     log_path=None, max_sim_s=None, started=None) -> dict:
    """Convenience wrapper: bind, run the loop, return the final digest."""
    server = NetworkServer(config, host, port, headless, log_path, max_sim_s)
    try:
        await server.start()
    except BindFailure:
        if server.log is not None:  # don't leave a header-only stub behind
            server.log._fh.close()
            os.unlink(server.log.path)
        raise
    if started is not None:
        started(server)
    return await server.run_loop()


def default_log_path(log_dir=None) -> str:
    directory = log_dir or os.environ.get("RADNAV_LOG_DIR") or "."
    os.makedirs(directory, exist_ok=True)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    return os.path.join(directory, f"mission-{stamp}-{os.getpid()}.jsonl")
