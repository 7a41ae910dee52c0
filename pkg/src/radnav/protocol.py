"""Wire protocol: versioned, sequenced JSON envelopes over a framed socket.

Every frame is one UTF-8 JSON document:

    {"v": 1, "seq": <u64>, "t": "<kind>", "ts": <float>, "payload": {...}}

Encoding is canonical: fixed field order (v, seq, t, ts, payload, and
per-kind payload field order), no whitespace, integers bare, floats in
shortest round-trip form. Canonical bytes make golden-file tests and
log replay byte-exact, and distinct envelopes encode to distinct byte
strings.

Decoding is strict: unknown message kinds, unknown fields, missing
fields, wrong types and non-finite numbers are all rejected, each with
a diagnostic naming the offending field path.

The codec is pure and thread-safe; SessionTracker state is single-owner
per connection.
"""
import json
import math
from dataclasses import dataclass
from enum import Enum

PROTOCOL_VERSION = 1
DEFAULT_PORT = 8474

_U64_MAX = 2**64 - 1


class ProtocolError(Exception):
    """Base class for codec failures."""


class MalformedJson(ProtocolError):
    def __init__(self, detail, offset=None):
        super().__init__(f"malformed JSON at byte {offset}: {detail}" if offset is not None else detail)
        self.offset = offset


class UnknownType(ProtocolError):
    def __init__(self, kind):
        super().__init__(f"unknown message type {kind!r}")
        self.kind = kind


class SchemaViolation(ProtocolError):
    def __init__(self, path, detail):
        super().__init__(f"{path}: {detail}")
        self.path = path


class UnserializableValue(ProtocolError):
    pass


@dataclass(frozen=True)
class Envelope:
    """One wire message. payload is a plain dict matching the kind's schema."""

    v: int
    seq: int
    t: str
    ts: float
    payload: dict

    @classmethod
    def make(cls, seq, kind, ts, payload):
        return cls(v=PROTOCOL_VERSION, seq=seq, t=kind, ts=float(ts), payload=payload)


# --- field checkers -------------------------------------------------------
# Each checker normalizes the value or raises SchemaViolation(path, why).


def _u64(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolation(path, f"expected unsigned integer, got {type(value).__name__}")
    if not 0 <= value <= _U64_MAX:
        raise SchemaViolation(path, f"integer {value} outside u64 range")
    return value


def _integer(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolation(path, f"expected integer, got {type(value).__name__}")
    return value


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(path, f"expected number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise SchemaViolation(path, f"non-finite number {value}")
    return value


def _string(value, path):
    if not isinstance(value, str):
        raise SchemaViolation(path, f"expected string, got {type(value).__name__}")
    return value


def _enum(*allowed):
    def check(value, path):
        value = _string(value, path)
        if value not in allowed:
            raise SchemaViolation(path, f"expected one of {sorted(allowed)}, got {value!r}")
        return value

    return check


def _rgba(value, path):
    if not isinstance(value, list) or len(value) != 4:
        raise SchemaViolation(path, "expected a list of 4 ints")
    out = []
    for i, channel in enumerate(value):
        channel = _integer(channel, f"{path}[{i}]")
        if not 0 <= channel <= 255:
            raise SchemaViolation(f"{path}[{i}]", f"channel {channel} outside [0, 255]")
        out.append(channel)
    return out


def _obj(schema):
    def check(value, path):
        return _check_object(value, schema, path)

    return check


def _array(item_checker):
    def check(value, path):
        if not isinstance(value, list):
            raise SchemaViolation(path, f"expected array, got {type(value).__name__}")
        return [item_checker(item, f"{path}[{i}]") for i, item in enumerate(value)]

    return check


def _check_object(value, schema, path):
    if not isinstance(value, dict):
        raise SchemaViolation(path, f"expected object, got {type(value).__name__}")
    for key in value:
        if key not in schema:
            raise SchemaViolation(f"{path}.{key}", "unknown field")
    out = {}
    for name, (checker, required) in schema.items():
        if name in value:
            out[name] = checker(value[name], f"{path}.{name}")
        elif required:
            raise SchemaViolation(f"{path}.{name}", "missing required field")
    return out


# --- payload schemas ------------------------------------------------------
# Ordered dicts double as the canonical field order on the wire.

_WAYPOINT_SCHEMA = {
    "id": (_u64, True),
    "lat": (_number, True),
    "lon": (_number, True),
    "alt": (_number, True),
    "hold_s": (_number, True),
    "speed_mps": (_number, False),
}

_VOXEL_SCHEMA = {
    "ix": (_integer, True),
    "iy": (_integer, True),
    "iz": (_integer, True),
    "rate": (_number, True),
    "exposure_s": (_number, True),
    "rgba": (_rgba, True),
}

_ORIGIN_SCHEMA = {
    "lat": (_number, True),
    "lon": (_number, True),
    "alt": (_number, True),
}


def _triple(item_checker):
    def check(value, path):
        if not isinstance(value, list) or len(value) != 3:
            raise SchemaViolation(path, "expected a list of 3 values")
        return [item_checker(v, f"{path}[{i}]") for i, v in enumerate(value)]

    return check


_GRID_SCHEMA = {
    "resolution": (_number, True),
    "min_corner": (_triple(_number), True),
    "dims": (_triple(_integer), True),
}

PAYLOAD_SCHEMAS = {
    "hello": {
        "role": (_enum("operator", "drone"), True),
        "name": (_string, True),
        "origin": (_obj(_ORIGIN_SCHEMA), False),
        "grid": (_obj(_GRID_SCHEMA), False),
    },
    "ack": {"acked_seq": (_u64, True)},
    "error": {
        "code": (_string, True),
        "detail": (_string, True),
        "cause_seq": (_u64, False),
    },
    "mission_upload": {
        "revision": (_u64, True),
        "waypoints": (_array(_obj(_WAYPOINT_SCHEMA)), True),
    },
    "waypoint_add": {
        "revision": (_u64, True),
        "index": (_integer, False),
        "waypoint": (_obj(_WAYPOINT_SCHEMA), True),
    },
    "waypoint_update": {
        "revision": (_u64, True),
        "waypoint": (_obj(_WAYPOINT_SCHEMA), True),
    },
    "waypoint_remove": {
        "revision": (_u64, True),
        "id": (_u64, True),
    },
    "mission_start": {"revision": (_u64, True)},
    "mission_abort": {},
    "telemetry": {
        "lat": (_number, True),
        "lon": (_number, True),
        "alt": (_number, True),
        "battery_pct": (_number, True),
        "gps_quality": (_enum("RTK_FIXED", "RTK_FLOAT", "GPS_ONLY", "NONE"), True),
        "mode": (_enum("GROUNDED", "HOLDING", "ENROUTE", "RETURNING", "LANDED_FAULT"), True),
        "active_waypoint_id": (_u64, False),
    },
    "rad_measurement": {
        "t_s": (_number, True),
        "lat": (_number, True),
        "lon": (_number, True),
        "alt": (_number, True),
        "counts": (_u64, True),
        "dt_s": (_number, True),
    },
    "mesh_delta": {
        "grid_revision": (_u64, True),
        "voxels": (_array(_obj(_VOXEL_SCHEMA)), True),
    },
    "mission_status": {
        "phase": (_enum("IDLE", "READY", "ENROUTE", "HOLDING", "COMPLETED", "ABORTED"), True),
        "active_index": (_integer, False),
        "visited_ids": (_array(_u64), True),
        "revision": (_u64, True),
        "waypoints": (_array(_obj(_WAYPOINT_SCHEMA)), False),
    },
}

MESSAGE_KINDS = tuple(PAYLOAD_SCHEMAS)

_ENVELOPE_FIELDS = ("v", "seq", "t", "ts", "payload")


def validate(env: Envelope) -> Envelope:
    """Normalize an envelope against its kind's schema (raises on failure)."""
    if env.v != PROTOCOL_VERSION:
        raise SchemaViolation("v", f"unsupported protocol version {env.v}")
    seq = _u64(env.seq, "seq")
    if env.t not in PAYLOAD_SCHEMAS:
        raise UnknownType(env.t)
    ts = _number(env.ts, "ts")
    payload = _check_object(env.payload, PAYLOAD_SCHEMAS[env.t], "payload")
    return Envelope(v=env.v, seq=seq, t=env.t, ts=ts, payload=payload)


def encode(env: Envelope) -> bytes:
    """Canonical UTF-8 JSON bytes for a valid envelope, one per frame.

    validate() rebuilds payload objects in schema key order (recursively),
    so serializing the validated envelope yields canonical field order.
    """
    try:
        env = validate(env)
    except SchemaViolation as exc:
        if "non-finite" in str(exc):
            raise UnserializableValue(str(exc)) from exc
        raise
    doc = {
        "v": env.v,
        "seq": env.seq,
        "t": env.t,
        "ts": env.ts,
        "payload": env.payload,
    }
    try:
        return json.dumps(doc, separators=(",", ":"), allow_nan=False).encode("utf-8")
    except ValueError as exc:  # non-finite float smuggled past validation
        raise UnserializableValue(str(exc)) from exc


def _reject_constant(token):
    raise ValueError(f"non-finite constant {token}")


def decode(data) -> Envelope:
    """Strict parse of one frame into a validated Envelope."""
    if isinstance(data, (bytes, bytearray)):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedJson(f"invalid UTF-8: {exc.reason}", offset=exc.start) from exc
    else:
        text = data
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise MalformedJson(exc.msg, offset=exc.pos) from exc
    except ValueError as exc:
        raise MalformedJson(str(exc)) from exc
    if not isinstance(doc, dict):
        raise MalformedJson(f"expected a JSON object, got {type(doc).__name__}")
    for key in doc:
        if key not in _ENVELOPE_FIELDS:
            raise SchemaViolation(key, "unknown envelope field")
    for key in _ENVELOPE_FIELDS:
        if key not in doc:
            raise SchemaViolation(key, "missing required field")
    if not isinstance(doc["v"], int) or isinstance(doc["v"], bool):
        raise SchemaViolation("v", f"expected integer, got {type(doc['v']).__name__}")
    if not isinstance(doc["t"], str):
        raise SchemaViolation("t", f"expected string, got {type(doc['t']).__name__}")
    return validate(
        Envelope(v=doc["v"], seq=doc["seq"], t=doc["t"], ts=doc["ts"], payload=doc["payload"])
    )


class Acceptance(Enum):
    ACCEPT = "accept"
    DUPLICATE = "duplicate"
    GAP = "gap"


class SessionTracker:
    """Per-sender sequence bookkeeping for one connection.

    The transport is assumed ordered and reliable; duplicates are
    dropped and counted, gaps are accepted and counted (they indicate
    bugs, not loss). The first envelope seen initializes the cursor.
    """

    def __init__(self):
        self.last_seq = None
        self.accepted = 0
        self.duplicates = 0
        self.gap_events = 0
        self.gap_count = 0

    def accept(self, env: Envelope) -> Acceptance:
        if self.last_seq is None:
            self.last_seq = env.seq
            self.accepted += 1
            return Acceptance.ACCEPT
        if env.seq <= self.last_seq:
            self.duplicates += 1
            return Acceptance.DUPLICATE
        if env.seq == self.last_seq + 1:
            self.last_seq = env.seq
            self.accepted += 1
            return Acceptance.ACCEPT
        self.gap_events += 1
        self.gap_count += env.seq - self.last_seq - 1
        self.last_seq = env.seq
        self.accepted += 1
        return Acceptance.GAP
