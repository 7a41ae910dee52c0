/**
 * Three.js scene: flat ground grid, red drone marker, blue numbered
 * waypoint markers, yellow flight path, and the radiation voxels as
 * translucent cubes colored straight from the wire RGBA.
 *
 * World axes are ENU meters (z up). The camera pans / rotates / zooms
 * with orbit controls; clicks raycast onto the altitude plane selected
 * by the slider to place or drag waypoints.
 */
import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";
import type { Enu } from "./geodesy.js";
import type { ConsoleState, VoxelCell } from "./state.js";

const WAYPOINT_BLUE = 0x2060ff;
const WAYPOINT_FROZEN = 0x8090a8;
const PENDING_BLUE = 0x9fc0ff;
const PATH_YELLOW = 0xf5d90a;
const DRONE_RED = 0xe03030;

export interface PickResult {
  kind: "ground" | "waypoint";
  point: Enu;
  waypointId?: number;
}

function vec(p: Enu): THREE.Vector3 {
  return new THREE.Vector3(p.east, p.north, p.up);
}

function makeLabel(text: string): THREE.Sprite {
  const canvas = document.createElement("canvas");
  canvas.width = 64;
  canvas.height = 64;
  const ctx = canvas.getContext("2d")!;
  ctx.font = "44px sans-serif";
  ctx.fillStyle = "white";
  ctx.strokeStyle = "black";
  ctx.lineWidth = 6;
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  ctx.strokeText(text, 32, 32);
  ctx.fillText(text, 32, 32);
  const sprite = new THREE.Sprite(
    new THREE.SpriteMaterial({ map: new THREE.CanvasTexture(canvas), depthTest: false })
  );
  sprite.scale.set(2.4, 2.4, 1);
  return sprite;
}

export class MissionScene {
  readonly scene = new THREE.Scene();
  readonly camera: THREE.PerspectiveCamera;
  readonly renderer: THREE.WebGLRenderer;
  readonly controls: OrbitControls;
  altitudePlane = 10;

  private drone: THREE.Object3D;
  private waypointGroup = new THREE.Group();
  private pathLine: THREE.Line;
  private voxelMesh: THREE.InstancedMesh | null = null;
  private voxelCapacity = 0;
  private raycaster = new THREE.Raycaster();
  private markerById = new Map<number, THREE.Object3D>();

  constructor(private state: ConsoleState, container: HTMLElement) {
    this.camera = new THREE.PerspectiveCamera(55, 1, 0.1, 5000);
    this.camera.up.set(0, 0, 1);
    this.camera.position.set(-40, -60, 45);

    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setClearColor(0x10141c);
    container.appendChild(this.renderer.domElement);

    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.target.set(0, 0, 0);

    const grid = new THREE.GridHelper(400, 80, 0x3a4455, 0x232a36);
    grid.rotation.x = Math.PI / 2;
    this.scene.add(grid);
    this.scene.add(new THREE.AxesHelper(10));
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.8));
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(60, 40, 120);
    this.scene.add(sun);

    const droneBody = new THREE.Mesh(
      new THREE.ConeGeometry(0.9, 1.6, 12),
      new THREE.MeshStandardMaterial({ color: DRONE_RED })
    );
    droneBody.rotation.x = Math.PI / 2;
    this.drone = new THREE.Group();
    this.drone.add(droneBody);
    this.drone.visible = false;
    this.scene.add(this.drone);

    this.pathLine = new THREE.Line(
      new THREE.BufferGeometry(),
      new THREE.LineBasicMaterial({ color: PATH_YELLOW })
    );
    this.scene.add(this.pathLine);
    this.scene.add(this.waypointGroup);

    this.resize(container.clientWidth || 800, container.clientHeight || 600);
  }

  resize(width: number, height: number): void {
    this.camera.aspect = width / height;
    this.camera.updateProjectionMatrix();
    this.renderer.setSize(width, height);
  }

  render(): void {
    if (this.state.dronePosition) {
      this.drone.visible = true;
      this.drone.position.copy(vec(this.state.dronePosition));
    }
    this.controls.update();
    this.renderer.render(this.scene, this.camera);
  }

  /** Raycast a pointer event onto waypoints first, then the altitude plane. */
  pick(clientX: number, clientY: number): PickResult | null {
    const rect = this.renderer.domElement.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((clientX - rect.left) / rect.width) * 2 - 1,
      -((clientY - rect.top) / rect.height) * 2 + 1
    );
    this.raycaster.setFromCamera(ndc, this.camera);
    const hits = this.raycaster.intersectObjects(this.waypointGroup.children, true);
    for (const hit of hits) {
      let obj: THREE.Object3D | null = hit.object;
      while (obj && obj.userData.waypointId === undefined) obj = obj.parent;
      if (obj) {
        const p = obj.position;
        return {
          kind: "waypoint",
          waypointId: obj.userData.waypointId as number,
          point: { east: p.x, north: p.y, up: p.z },
        };
      }
    }
    const plane = new THREE.Plane(new THREE.Vector3(0, 0, 1), -this.altitudePlane);
    const point = new THREE.Vector3();
    if (this.raycaster.ray.intersectPlane(plane, point)) {
      return { kind: "ground", point: { east: point.x, north: point.y, up: point.z } };
    }
    return null;
  }

  /** Rebuild waypoint markers and the path polyline from console state. */
  refreshPlan(): void {
    this.waypointGroup.clear();
    this.markerById.clear();
    this.state.waypoints.forEach((w, index) => {
      const p = this.state.waypointEnu(w);
      if (!p) return;
      const frozen = !this.state.isEditable(w.id);
      const marker = new THREE.Group();
      marker.position.copy(vec(p));
      marker.userData.waypointId = w.id;
      const ball = new THREE.Mesh(
        new THREE.SphereGeometry(0.8, 16, 12),
        new THREE.MeshStandardMaterial({
          color: frozen ? WAYPOINT_FROZEN : WAYPOINT_BLUE,
          transparent: frozen,
          opacity: frozen ? 0.6 : 1.0,
        })
      );
      marker.add(ball);
      const label = makeLabel(String(index + 1));
      label.position.set(0, 0, 2.0);
      marker.add(label);
      this.waypointGroup.add(marker);
      this.markerById.set(w.id, marker);
    });
    for (const pending of this.state.pending.values()) {
      const ghost = new THREE.Mesh(
        new THREE.SphereGeometry(0.8, 16, 12),
        new THREE.MeshStandardMaterial({ color: PENDING_BLUE, transparent: true, opacity: 0.5 })
      );
      ghost.position.copy(vec(pending.position));
      this.waypointGroup.add(ghost);
    }
    const points = this.state.pathPoints().map(vec);
    this.pathLine.geometry.dispose();
    this.pathLine.geometry = new THREE.BufferGeometry().setFromPoints(points);
    this.pathLine.visible = this.state.overlay.path && points.length > 1;
  }

  moveMarker(id: number, position: Enu): void {
    this.markerById.get(id)?.position.copy(vec(position));
  }

  /** Re-upload the voxel instances (cheap at desk scale). */
  refreshVoxels(): void {
    const cells: VoxelCell[] = [...this.state.voxels.values()];
    if (!this.state.overlay.radiation || cells.length === 0 || this.state.grid === null) {
      if (this.voxelMesh) this.voxelMesh.visible = false;
      return;
    }
    if (this.voxelMesh === null || cells.length > this.voxelCapacity) {
      if (this.voxelMesh) this.scene.remove(this.voxelMesh);
      this.voxelCapacity = Math.max(256, cells.length * 2);
      const r = this.state.grid.resolution;
      this.voxelMesh = new THREE.InstancedMesh(
        new THREE.BoxGeometry(r, r, r),
        new THREE.MeshStandardMaterial({ transparent: true, opacity: 0.55 }),
        this.voxelCapacity
      );
      this.scene.add(this.voxelMesh);
    }
    const mesh = this.voxelMesh;
    mesh.visible = true;
    const matrix = new THREE.Matrix4();
    const color = new THREE.Color();
    cells.forEach((cell, i) => {
      const center = this.state.voxelCenter(cell)!;
      matrix.setPosition(center.east, center.north, center.up);
      mesh.setMatrixAt(i, matrix);
      color.setRGB(cell.rgba[0] / 255, cell.rgba[1] / 255, cell.rgba[2] / 255);
      mesh.setColorAt(i, color);
    });
    mesh.count = cells.length;
    mesh.instanceMatrix.needsUpdate = true;
    if (mesh.instanceColor) mesh.instanceColor.needsUpdate = true;
  }
}
