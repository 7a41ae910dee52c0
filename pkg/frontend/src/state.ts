/**
 * Console state: the single source of truth behind the 3D scene.
 *
 * Mission state is server-authoritative. Commands go out optimistically
 * (a pending marker shows immediately), but the plan itself only
 * changes when a mission_status broadcast replaces it; an error reply
 * rolls the pending marker back. Visited and active waypoints are
 * frozen in the UI exactly as the server would refuse them, so the
 * operator can't even attempt a doomed edit.
 *
 * Everything runs on the single UI event loop: socket events and render
 * ticks interleave on one thread of control.
 */
import { GeoOrigin, type Enu, type Geodetic } from "./geodesy.js";
import {
  SessionTracker,
  makeEnvelope,
  type Envelope,
  type MessageKind,
} from "./protocol.js";

export interface WireWaypoint {
  id: number;
  lat: number;
  lon: number;
  alt: number;
  hold_s: number;
  speed_mps?: number;
}

export interface VoxelCell {
  ix: number;
  iy: number;
  iz: number;
  rate: number;
  exposure_s: number;
  rgba: [number, number, number, number];
}

export interface GridGeometry {
  resolution: number;
  minCorner: [number, number, number];
  dims: [number, number, number];
}

export interface PendingMarker {
  seq: number;
  position: Enu;
  holdS: number;
}

export interface OverlayState {
  battery: boolean;
  gps: boolean;
  radiation: boolean;
  path: boolean;
}

export type ConsoleEvent =
  | { kind: "scene" }
  | { kind: "plan" }
  | { kind: "voxels"; changed: number }
  | { kind: "toast"; level: "info" | "error"; text: string }
  | { kind: "connection"; up: boolean };

export class ConsoleState {
  serverName = "";
  origin: GeoOrigin | null = null;
  grid: GridGeometry | null = null;

  // mission (authoritative, from mission_status)
  phase = "IDLE";
  revision = 0;
  activeIndex: number | null = null;
  visitedIds: number[] = [];
  waypoints: WireWaypoint[] = [];

  // vehicle (from telemetry)
  dronePosition: Enu | null = null;
  batteryPct: number | null = null;
  gpsQuality = "NONE";
  flightMode = "GROUNDED";
  activeWaypointId: number | null = null;
  lastTelemetryTs = 0;

  // radiation map (from mesh_delta)
  voxels = new Map<string, VoxelCell>();
  gridRevision = 0;
  measurementCount = 0;
  lastCountRate: number | null = null;

  pending = new Map<number, PendingMarker>();
  overlay: OverlayState = { battery: true, gps: true, radiation: true, path: true };
  tracker = new SessionTracker();
  connected = false;

  private nextSeq = 0;
  private listeners: ((event: ConsoleEvent) => void)[] = [];

  onEvent(listener: (event: ConsoleEvent) => void): void {
    this.listeners.push(listener);
  }

  private emit(event: ConsoleEvent): void {
    for (const listener of this.listeners) listener(event);
  }

  private takeSeq(): number {
    this.nextSeq += 1;
    return this.nextSeq;
  }

  private command(kind: MessageKind, payload: Record<string, unknown>): Envelope {
    return makeEnvelope(this.takeSeq(), kind, Date.now() / 1000.0, payload);
  }

  // -- editability ------------------------------------------------------------

  get activeId(): number | null {
    if (
      (this.phase === "ENROUTE" || this.phase === "HOLDING") &&
      this.activeIndex !== null &&
      this.activeIndex < this.waypoints.length
    ) {
      return this.waypoints[this.activeIndex].id;
    }
    return null;
  }

  /** A waypoint is editable unless it is visited or currently active. */
  isEditable(id: number): boolean {
    return !this.visitedIds.includes(id) && this.activeId !== id;
  }

  // -- operator actions (each returns the envelope to send, or null) ------------

  /** Clicked scene point + altitude plane -> waypoint_add command. */
  placeWaypoint(ground: Enu, altitudePlane: number, holdS = 0.0): Envelope | null {
    if (this.origin === null) return null;
    const position: Enu = { east: ground.east, north: ground.north, up: altitudePlane };
    const g = this.origin.toGeodetic(position);
    const env = this.command("waypoint_add", {
      revision: this.revision,
      waypoint: { id: 0, lat: g.lat, lon: g.lon, alt: g.alt, hold_s: holdS },
    });
    this.pending.set(env.seq, { seq: env.seq, position, holdS });
    this.emit({ kind: "plan" });
    return env;
  }

  /** Move an editable waypoint; refused locally when frozen. */
  editWaypoint(id: number, position: Enu, holdS?: number): Envelope | null {
    if (this.origin === null || !this.isEditable(id)) return null;
    const current = this.waypoints.find((w) => w.id === id);
    if (current === undefined) return null;
    const g = this.origin.toGeodetic(position);
    const waypoint: Record<string, unknown> = {
      id,
      lat: g.lat,
      lon: g.lon,
      alt: g.alt,
      hold_s: holdS ?? current.hold_s,
    };
    if (current.speed_mps !== undefined) waypoint.speed_mps = current.speed_mps;
    return this.command("waypoint_update", { revision: this.revision, waypoint });
  }

  removeWaypoint(id: number): Envelope | null {
    if (!this.isEditable(id)) return null;
    if (!this.waypoints.some((w) => w.id === id)) return null;
    return this.command("waypoint_remove", { revision: this.revision, id });
  }

  startMission(): Envelope {
    return this.command("mission_start", { revision: this.revision });
  }

  abortMission(): Envelope {
    return this.command("mission_abort", {});
  }

  helloEnvelope(name = "operator-console"): Envelope {
    return this.command("hello", { role: "operator", name });
  }

  // -- geometry helpers ----------------------------------------------------------

  waypointEnu(w: WireWaypoint): Enu | null {
    return this.origin ? this.origin.toLocal({ lat: w.lat, lon: w.lon, alt: w.alt }) : null;
  }

  /** Scene polyline through the plan, in execution order. */
  pathPoints(): Enu[] {
    const points: Enu[] = [];
    for (const w of this.waypoints) {
      const p = this.waypointEnu(w);
      if (p) points.push(p);
    }
    return points;
  }

  voxelCenter(cell: VoxelCell): Enu | null {
    if (this.grid === null) return null;
    const r = this.grid.resolution;
    const [ex, ny, uz] = this.grid.minCorner;
    return {
      east: ex + (cell.ix + 0.5) * r,
      north: ny + (cell.iy + 0.5) * r,
      up: uz + (cell.iz + 0.5) * r,
    };
  }

  // -- inbound stream ---------------------------------------------------------------

  applyEnvelope(env: Envelope): void {
    if (this.tracker.accept(env) === "duplicate") return;
    switch (env.t) {
      case "hello": {
        const p = env.payload as {
          name: string;
          origin?: { lat: number; lon: number; alt: number };
          grid?: { resolution: number; min_corner: number[]; dims: number[] };
        };
        this.serverName = p.name;
        if (p.origin) this.origin = new GeoOrigin(p.origin);
        if (p.grid) {
          this.grid = {
            resolution: p.grid.resolution,
            minCorner: p.grid.min_corner as [number, number, number],
            dims: p.grid.dims as [number, number, number],
          };
        }
        this.emit({ kind: "scene" });
        break;
      }
      case "mission_status": {
        const p = env.payload as {
          phase: string;
          active_index?: number;
          visited_ids: number[];
          revision: number;
          waypoints?: WireWaypoint[];
        };
        this.phase = p.phase;
        this.activeIndex = p.active_index ?? null;
        this.visitedIds = p.visited_ids;
        this.revision = p.revision;
        if (p.waypoints !== undefined) this.waypoints = p.waypoints;
        // the authoritative plan supersedes optimistic markers
        this.pending.clear();
        this.emit({ kind: "plan" });
        break;
      }
      case "telemetry": {
        const p = env.payload as {
          lat: number;
          lon: number;
          alt: number;
          battery_pct: number;
          gps_quality: string;
          mode: string;
          active_waypoint_id?: number;
        };
        if (this.origin) {
          this.dronePosition = this.origin.toLocal({ lat: p.lat, lon: p.lon, alt: p.alt });
        }
        this.batteryPct = p.battery_pct;
        this.gpsQuality = p.gps_quality;
        this.flightMode = p.mode;
        this.activeWaypointId = p.active_waypoint_id ?? null;
        this.lastTelemetryTs = env.ts;
        this.emit({ kind: "scene" });
        break;
      }
      case "rad_measurement": {
        const p = env.payload as { counts: number; dt_s: number };
        this.measurementCount += 1;
        this.lastCountRate = p.counts / p.dt_s;
        break;
      }
      case "mesh_delta": {
        const p = env.payload as { grid_revision: number; voxels: VoxelCell[] };
        this.gridRevision = p.grid_revision;
        for (const cell of p.voxels) {
          this.voxels.set(`${cell.ix},${cell.iy},${cell.iz}`, cell);
        }
        this.emit({ kind: "voxels", changed: p.voxels.length });
        break;
      }
      case "ack":
        break; // plan confirmation arrives via the status broadcast
      case "error": {
        const p = env.payload as { code: string; detail: string; cause_seq?: number };
        if (p.cause_seq !== undefined && this.pending.delete(p.cause_seq)) {
          this.emit({ kind: "plan" }); // optimistic marker rolled back
        }
        this.emit({ kind: "toast", level: "error", text: `${p.code}: ${p.detail}` });
        break;
      }
      default:
        break;
    }
  }

  setConnected(up: boolean): void {
    this.connected = up;
    this.emit({ kind: "connection", up });
  }

  toast(level: "info" | "error", text: string): void {
    this.emit({ kind: "toast", level, text });
  }
}
