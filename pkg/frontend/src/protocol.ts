/**
 * Wire protocol codec, mirroring the ground station's canonical JSON
 * envelopes:
 *
 *   {"v":1,"seq":N,"t":KIND,"ts":SECONDS,"payload":{...}}
 *
 * Decoding is strict (unknown kinds/fields, wrong types and non-finite
 * numbers are rejected with a field path). Encoding is canonical and
 * schema-driven: fixed field order and Python-compatible number
 * formatting, so frames byte-match the server's golden corpus — the
 * one JS-specific wrinkle is that integral floats must render as "1.0"
 * rather than JSON.stringify's "1".
 */

export const PROTOCOL_VERSION = 1;
export const DEFAULT_PORT = 8474;

const U64_MAX = 2n ** 64n - 1n;

export class ProtocolError extends Error {}

export class MalformedJson extends ProtocolError {}

export class UnknownType extends ProtocolError {
  constructor(public kind: string) {
    super(`unknown message type ${JSON.stringify(kind)}`);
  }
}

export class SchemaViolation extends ProtocolError {
  constructor(public path: string, detail: string) {
    super(`${path}: ${detail}`);
  }
}

export interface Envelope {
  v: number;
  seq: number;
  t: MessageKind;
  ts: number;
  payload: Record<string, unknown>;
}

// --- schema definition ------------------------------------------------------

type FType =
  | { k: "u64" }
  | { k: "int" }
  | { k: "float" }
  | { k: "str" }
  | { k: "enum"; values: readonly string[] }
  | { k: "rgba" }
  | { k: "obj"; schema: Schema }
  | { k: "arr"; item: FType };

type Schema = Record<string, { t: FType; required: boolean }>;

const f = (t: FType, required = true) => ({ t, required });
const FLOAT: FType = { k: "float" };
const U64: FType = { k: "u64" };
const INT: FType = { k: "int" };
const STR: FType = { k: "str" };

const WAYPOINT: Schema = {
  id: f(U64),
  lat: f(FLOAT),
  lon: f(FLOAT),
  alt: f(FLOAT),
  hold_s: f(FLOAT),
  speed_mps: f(FLOAT, false),
};

const VOXEL: Schema = {
  ix: f(INT),
  iy: f(INT),
  iz: f(INT),
  rate: f(FLOAT),
  exposure_s: f(FLOAT),
  rgba: f({ k: "rgba" }),
};

const ORIGIN: Schema = { lat: f(FLOAT), lon: f(FLOAT), alt: f(FLOAT) };

const GRID: Schema = {
  resolution: f(FLOAT),
  min_corner: f({ k: "arr", item: FLOAT }),
  dims: f({ k: "arr", item: INT }),
};

export const GPS_QUALITIES = ["RTK_FIXED", "RTK_FLOAT", "GPS_ONLY", "NONE"] as const;
export const FLIGHT_MODES = ["GROUNDED", "HOLDING", "ENROUTE", "RETURNING", "LANDED_FAULT"] as const;
export const MISSION_PHASES = ["IDLE", "READY", "ENROUTE", "HOLDING", "COMPLETED", "ABORTED"] as const;

const PAYLOAD_SCHEMAS = {
  hello: {
    role: f({ k: "enum", values: ["operator", "drone"] }),
    name: f(STR),
    origin: f({ k: "obj", schema: ORIGIN }, false),
    grid: f({ k: "obj", schema: GRID }, false),
  },
  ack: { acked_seq: f(U64) },
  error: { code: f(STR), detail: f(STR), cause_seq: f(U64, false) },
  mission_upload: {
    revision: f(U64),
    waypoints: f({ k: "arr", item: { k: "obj", schema: WAYPOINT } }),
  },
  waypoint_add: {
    revision: f(U64),
    index: f(INT, false),
    waypoint: f({ k: "obj", schema: WAYPOINT }),
  },
  waypoint_update: {
    revision: f(U64),
    waypoint: f({ k: "obj", schema: WAYPOINT }),
  },
  waypoint_remove: { revision: f(U64), id: f(U64) },
  mission_start: { revision: f(U64) },
  mission_abort: {},
  telemetry: {
    lat: f(FLOAT),
    lon: f(FLOAT),
    alt: f(FLOAT),
    battery_pct: f(FLOAT),
    gps_quality: f({ k: "enum", values: GPS_QUALITIES }),
    mode: f({ k: "enum", values: FLIGHT_MODES }),
    active_waypoint_id: f(U64, false),
  },
  rad_measurement: {
    t_s: f(FLOAT),
    lat: f(FLOAT),
    lon: f(FLOAT),
    alt: f(FLOAT),
    counts: f(U64),
    dt_s: f(FLOAT),
  },
  mesh_delta: {
    grid_revision: f(U64),
    voxels: f({ k: "arr", item: { k: "obj", schema: VOXEL } }),
  },
  mission_status: {
    phase: f({ k: "enum", values: MISSION_PHASES }),
    active_index: f(INT, false),
    visited_ids: f({ k: "arr", item: U64 }),
    revision: f(U64),
    waypoints: f({ k: "arr", item: { k: "obj", schema: WAYPOINT } }, false),
  },
} satisfies Record<string, Schema>;

export type MessageKind = keyof typeof PAYLOAD_SCHEMAS;
export const MESSAGE_KINDS = Object.keys(PAYLOAD_SCHEMAS) as MessageKind[];

// --- validation --------------------------------------------------------------

function isPlainObject(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function checkValue(value: unknown, t: FType, path: string): unknown {
  switch (t.k) {
    case "u64": {
      if (typeof value !== "number" || !Number.isInteger(value) || value < 0)
        throw new SchemaViolation(path, `expected unsigned integer, got ${JSON.stringify(value)}`);
      if (BigInt(value) > U64_MAX) throw new SchemaViolation(path, "outside u64 range");
      return value;
    }
    case "int":
      if (typeof value !== "number" || !Number.isInteger(value))
        throw new SchemaViolation(path, `expected integer, got ${JSON.stringify(value)}`);
      return value;
    case "float":
      if (typeof value !== "number" || !Number.isFinite(value))
        throw new SchemaViolation(path, `expected finite number, got ${JSON.stringify(value)}`);
      return value;
    case "str":
      if (typeof value !== "string")
        throw new SchemaViolation(path, `expected string, got ${typeof value}`);
      return value;
    case "enum":
      if (typeof value !== "string" || !t.values.includes(value))
        throw new SchemaViolation(path, `expected one of ${t.values.join("/")}, got ${JSON.stringify(value)}`);
      return value;
    case "rgba": {
      if (!Array.isArray(value) || value.length !== 4)
        throw new SchemaViolation(path, "expected a list of 4 ints");
      return value.map((c, i) => {
        if (typeof c !== "number" || !Number.isInteger(c) || c < 0 || c > 255)
          throw new SchemaViolation(`${path}[${i}]`, `channel outside [0, 255]`);
        return c;
      });
    }
    case "obj":
      return checkObject(value, t.schema, path);
    case "arr":
      if (!Array.isArray(value))
        throw new SchemaViolation(path, `expected array, got ${typeof value}`);
      return value.map((item, i) => checkValue(item, t.item, `${path}[${i}]`));
  }
}

function checkObject(value: unknown, schema: Schema, path: string): Record<string, unknown> {
  if (!isPlainObject(value))
    throw new SchemaViolation(path, `expected object, got ${Array.isArray(value) ? "array" : typeof value}`);
  for (const key of Object.keys(value)) {
    if (!(key in schema)) throw new SchemaViolation(`${path}.${key}`, "unknown field");
  }
  const out: Record<string, unknown> = {};
  for (const [name, spec] of Object.entries(schema)) {
    if (name in value) out[name] = checkValue(value[name], spec.t, `${path}.${name}`);
    else if (spec.required) throw new SchemaViolation(`${path}.${name}`, "missing required field");
  }
  return out;
}

export function validate(env: Envelope): Envelope {
  if (env.v !== PROTOCOL_VERSION)
    throw new SchemaViolation("v", `unsupported protocol version ${env.v}`);
  checkValue(env.seq, U64, "seq");
  const schema = PAYLOAD_SCHEMAS[env.t];
  if (schema === undefined) throw new UnknownType(env.t);
  checkValue(env.ts, FLOAT, "ts");
  return {
    v: env.v,
    seq: env.seq,
    t: env.t,
    ts: env.ts,
    payload: checkObject(env.payload, schema, "payload"),
  };
}

// --- canonical encoding -------------------------------------------------------

/** Python-repr-compatible float formatting: integral values get ".0". */
function fmtFloat(v: number): string {
  if (Object.is(v, -0)) return "-0.0";
  const s = String(v);
  if (Number.isInteger(v) && !s.includes("e") && !s.includes("E")) return s + ".0";
  return s;
}

function writeValue(value: unknown, t: FType): string {
  switch (t.k) {
    case "u64":
    case "int":
      return String(value);
    case "float":
      return fmtFloat(value as number);
    case "str":
    case "enum":
      return JSON.stringify(value);
    case "rgba":
      return `[${(value as number[]).join(",")}]`;
    case "obj":
      return writeObject(value as Record<string, unknown>, t.schema);
    case "arr":
      return `[${(value as unknown[]).map((item) => writeValue(item, t.item)).join(",")}]`;
  }
}

function writeObject(value: Record<string, unknown>, schema: Schema): string {
  const parts: string[] = [];
  for (const [name, spec] of Object.entries(schema)) {
    if (name in value) parts.push(`${JSON.stringify(name)}:${writeValue(value[name], spec.t)}`);
  }
  return `{${parts.join(",")}}`;
}

export function encode(env: Envelope): string {
  const valid = validate(env);
  const payload = writeObject(valid.payload, PAYLOAD_SCHEMAS[valid.t]);
  return `{"v":${valid.v},"seq":${valid.seq},"t":${JSON.stringify(valid.t)},"ts":${fmtFloat(valid.ts)},"payload":${payload}}`;
}

const ENVELOPE_FIELDS = ["v", "seq", "t", "ts", "payload"];

export function decode(data: string): Envelope {
  let doc: unknown;
  try {
    doc = JSON.parse(data);
  } catch (err) {
    throw new MalformedJson(String(err instanceof Error ? err.message : err));
  }
  if (!isPlainObject(doc)) throw new MalformedJson("expected a JSON object");
  for (const key of Object.keys(doc)) {
    if (!ENVELOPE_FIELDS.includes(key)) throw new SchemaViolation(key, "unknown envelope field");
  }
  for (const key of ENVELOPE_FIELDS) {
    if (!(key in doc)) throw new SchemaViolation(key, "missing required field");
  }
  if (typeof doc.v !== "number" || !Number.isInteger(doc.v))
    throw new SchemaViolation("v", "expected integer");
  if (typeof doc.t !== "string") throw new SchemaViolation("t", "expected string");
  return validate({
    v: doc.v,
    seq: doc.seq as number,
    t: doc.t as MessageKind,
    ts: doc.ts as number,
    payload: doc.payload as Record<string, unknown>,
  });
}

export function makeEnvelope(seq: number, t: MessageKind, ts: number, payload: Record<string, unknown>): Envelope {
  return { v: PROTOCOL_VERSION, seq, t, ts, payload };
}

// --- per-connection sequencing --------------------------------------------------

export type Acceptance = "accept" | "duplicate" | "gap";

/** Receive-side sequence bookkeeping; gaps are surfaced, not fatal. */
export class SessionTracker {
  lastSeq: number | null = null;
  accepted = 0;
  duplicates = 0;
  gapEvents = 0;
  gapCount = 0;

  accept(env: Envelope): Acceptance {
    if (this.lastSeq === null) {
      this.lastSeq = env.seq;
      this.accepted += 1;
      return "accept";
    }
    if (env.seq <= this.lastSeq) {
      this.duplicates += 1;
      return "duplicate";
    }
    if (env.seq === this.lastSeq + 1) {
      this.lastSeq = env.seq;
      this.accepted += 1;
      return "accept";
    }
    this.gapEvents += 1;
    this.gapCount += env.seq - this.lastSeq - 1;
    this.lastSeq = env.seq;
    this.accepted += 1;
    return "gap";
  }
}
