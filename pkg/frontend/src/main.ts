/**
 * Browser entry point. Server address comes from the URL:
 * ?host=127.0.0.1&port=8474
 */
import { ConsoleClient } from "./client.js";
import { MissionScene } from "./scene.js";
import { ConsoleState } from "./state.js";
import { DEFAULT_PORT } from "./protocol.js";

const params = new URLSearchParams(window.location.search);
const host = params.get("host") ?? window.location.hostname ?? "127.0.0.1";
const port = Number(params.get("port") ?? DEFAULT_PORT);

const state = new ConsoleState();
const client = new ConsoleClient(state, `ws://${host}:${port}/`);

const container = document.getElementById("scene")!;
const scene = new MissionScene(state, container);

// --- overlay panel -----------------------------------------------------------

const hud = {
  connection: document.getElementById("connection")!,
  phase: document.getElementById("phase")!,
  battery: document.getElementById("battery")!,
  gps: document.getElementById("gps")!,
  mode: document.getElementById("mode")!,
  rate: document.getElementById("rate")!,
  voxels: document.getElementById("voxels")!,
  gaps: document.getElementById("gaps")!,
  toast: document.getElementById("toast")!,
  altitude: document.getElementById("altitude") as HTMLInputElement,
  altitudeValue: document.getElementById("altitude-value")!,
};

function refreshHud(): void {
  hud.connection.textContent = state.connected ? `connected: ${state.serverName}` : "disconnected";
  hud.connection.className = state.connected ? "ok" : "bad";
  hud.phase.textContent = `${state.phase} rev ${state.revision}` +
    (state.visitedIds.length ? ` visited ${state.visitedIds.join(",")}` : "");
  hud.battery.textContent = state.batteryPct === null ? "--" : `${state.batteryPct.toFixed(1)}%`;
  hud.battery.parentElement!.style.display = state.overlay.battery ? "" : "none";
  hud.gps.textContent = state.gpsQuality;
  hud.gps.parentElement!.style.display = state.overlay.gps ? "" : "none";
  hud.mode.textContent = state.flightMode;
  hud.rate.textContent = state.lastCountRate === null ? "--" : `${state.lastCountRate.toFixed(1)} c/s`;
  hud.voxels.textContent = String(state.voxels.size);
  hud.gaps.textContent = String(state.tracker.gapCount);
}

let toastTimer: number | undefined;
state.onEvent((event) => {
  switch (event.kind) {
    case "plan":
      scene.refreshPlan();
      refreshHud();
      break;
    case "voxels":
      scene.refreshVoxels();
      refreshHud();
      break;
    case "toast":
      hud.toast.textContent = event.text;
      hud.toast.className = event.level;
      window.clearTimeout(toastTimer);
      toastTimer = window.setTimeout(() => (hud.toast.textContent = ""), 4000);
      break;
    default:
      refreshHud();
  }
});

for (const name of ["battery", "gps", "radiation", "path"] as const) {
  const box = document.getElementById(`toggle-${name}`) as HTMLInputElement;
  box.checked = state.overlay[name];
  box.onchange = () => {
    state.overlay[name] = box.checked;
    scene.refreshPlan();
    scene.refreshVoxels();
    refreshHud();
  };
}

hud.altitude.oninput = () => {
  scene.altitudePlane = Number(hud.altitude.value);
  hud.altitudeValue.textContent = `${hud.altitude.value} m`;
};
hud.altitude.oninput(new Event("input") as never);

document.getElementById("start")!.onclick = () => client.send(state.startMission());
document.getElementById("abort")!.onclick = () => client.send(state.abortMission());

// --- pointer interaction -------------------------------------------------------

let dragId: number | null = null;
let dragMoved = false;
let selectedId: number | null = null;

scene.renderer.domElement.addEventListener("pointerdown", (event) => {
  if (event.button !== 0) return;
  const hit = scene.pick(event.clientX, event.clientY);
  if (hit?.kind === "waypoint" && hit.waypointId !== undefined) {
    selectedId = hit.waypointId;
    if (state.isEditable(hit.waypointId)) {
      dragId = hit.waypointId;
      dragMoved = false;
      scene.controls.enabled = false;
    } else {
      state.toast("info", `waypoint ${hit.waypointId} is locked (visited or active)`);
    }
  }
});

scene.renderer.domElement.addEventListener("pointermove", (event) => {
  if (dragId === null) return;
  const hit = scene.pick(event.clientX, event.clientY);
  if (hit) {
    dragMoved = true;
    scene.moveMarker(dragId, { east: hit.point.east, north: hit.point.north, up: scene.altitudePlane });
  }
});

scene.renderer.domElement.addEventListener("pointerup", (event) => {
  if (dragId !== null) {
    const id = dragId;
    dragId = null;
    scene.controls.enabled = true;
    const hit = scene.pick(event.clientX, event.clientY);
    if (dragMoved && hit) {
      const sent = client.send(
        state.editWaypoint(id, { east: hit.point.east, north: hit.point.north, up: scene.altitudePlane })
      );
      if (!sent) scene.refreshPlan(); // snap back
    } else {
      scene.refreshPlan();
    }
    return;
  }
  const hit = scene.pick(event.clientX, event.clientY);
  if (hit?.kind === "ground" && event.shiftKey) {
    client.send(state.placeWaypoint(hit.point, scene.altitudePlane));
  }
});

window.addEventListener("keydown", (event) => {
  if ((event.key === "Delete" || event.key === "Backspace") && selectedId !== null) {
    const env = state.removeWaypoint(selectedId);
    if (env === null) {
      state.toast("info", `waypoint ${selectedId} is locked`);
    } else {
      client.send(env);
    }
    selectedId = null;
  }
});

window.addEventListener("resize", () =>
  scene.resize(container.clientWidth, container.clientHeight)
);
scene.resize(container.clientWidth, container.clientHeight);

function frame(): void {
  scene.render();
  requestAnimationFrame(frame);
}

client.connect();
requestAnimationFrame(frame);
