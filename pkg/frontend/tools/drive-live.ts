/**
 * Headless console drive against a live ground station, for end-to-end
 * verification without a browser: connects over WebSocket, places a
 * waypoint, starts the mission, watches the stream, aborts.
 *
 *   esbuild tools/drive-live.ts --bundle --format=esm --outfile=dist/drive-live.js
 *   node --experimental-websocket dist/drive-live.js [port]
 */
import { ConsoleClient } from "../src/client.js";
import { ConsoleState } from "../src/state.js";
import { enuDistance } from "../src/geodesy.js";

const port = Number(process.argv[2] ?? 8474);
const state = new ConsoleState();
const client = new ConsoleClient(state, `ws://127.0.0.1:${port}/`);

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

async function until(predicate: () => boolean, what: string, timeoutMs = 15000): Promise<void> {
  const start = Date.now();
  while (!predicate()) {
    if (Date.now() - start > timeoutMs) throw new Error(`timed out waiting for ${what}`);
    await sleep(20);
  }
}

async function main(): Promise<void> {
  client.connect();
  await until(() => state.origin !== null, "hello with origin");
  console.log(`connected to "${state.serverName}", grid res ${state.grid?.resolution} m`);
  await until(() => state.waypoints.length > 0 || state.phase !== "IDLE", "initial status");
  console.log(`initial plan: ${state.waypoints.length} waypoints, phase ${state.phase}`);

  const clicked = { east: 12.0, north: 18.0, up: 0.0 };
  const placed = state.placeWaypoint(clicked, 12.0);
  if (!client.send(placed)) throw new Error("send failed");
  const before = state.waypoints.length;
  await until(() => state.waypoints.length === before + 1, "status echoing the new waypoint");
  const added = state.waypoints[state.waypoints.length - 1];
  const echoed = state.origin!.toLocal(added);
  const error = enuDistance(echoed, { east: 12.0, north: 18.0, up: 12.0 });
  console.log(`placed waypoint id ${added.id}; echo error ${(error * 1000).toFixed(3)} mm`);
  if (error > 0.01) throw new Error("placement round-trip exceeded 1 cm");

  client.send(state.startMission());
  await until(() => state.phase === "ENROUTE", "mission start");
  console.log("mission running");
  await until(() => state.dronePosition !== null && state.batteryPct !== null, "telemetry");
  const telemetryAt = state.measurementCount;
  await sleep(4000);
  console.log(
    `after 4 s: drone at (${state.dronePosition!.east.toFixed(1)}, ` +
      `${state.dronePosition!.north.toFixed(1)}, ${state.dronePosition!.up.toFixed(1)}) m, ` +
      `battery ${state.batteryPct!.toFixed(2)}%, gps ${state.gpsQuality}, ` +
      `${state.measurementCount - telemetryAt} measurements, ${state.voxels.size} voxels, ` +
      `${state.tracker.gapCount} seq gaps`
  );
  if (state.voxels.size === 0) throw new Error("no radiation voxels arrived");
  if (state.tracker.gapCount !== 0) throw new Error("sequence gaps on a fresh session");

  const active = state.activeId;
  if (active !== null) {
    if (state.editWaypoint(active, { east: 0, north: 0, up: 10 }) !== null) {
      throw new Error("active waypoint was editable in the UI");
    }
    console.log(`active waypoint ${active} correctly locked in the UI`);
  }

  client.send(state.abortMission());
  await until(() => state.phase === "ABORTED", "abort");
  console.log(`aborted; visited ${JSON.stringify(state.visitedIds)}`);
  console.log("LIVE DRIVE OK");
  process.exit(0);
}

main().catch((err) => {
  console.error("LIVE DRIVE FAILED:", err);
  process.exit(1);
});
