/** Canvas 2D wireframe renderer: mesh edges, witness overlay, control
 * points. Thin by design; all displayed geometry arrives from the store.
 */
import { Vec3 } from "./api.js";
import { OrbitCamera } from "./camera.js";
import { MeshSnapshot, ViewerStore, WitnessSegment } from "./state.js";

export interface RenderOptions {
  meshColor: string;
  witnessColor: string;
  grazingColor: string;
  pointColor: string;
  pendingColor: string;
  selectedColor: string;
}

export const DEFAULT_OPTIONS: RenderOptions = {
  meshColor: "rgba(80, 120, 180, 0.55)",
  witnessColor: "#c22f2f",
  grazingColor: "#e0a325",
  pointColor: "#2b2b2b",
  pendingColor: "#cc7a00",
  selectedColor: "#7a1f1f",
};

function segment(
  ctx: CanvasRenderingContext2D,
  camera: OrbitCamera,
  a: Vec3,
  b: Vec3,
  width: number,
  height: number,
): boolean {
  const pa = camera.project(a, width, height);
  const pb = camera.project(b, width, height);
  if (!pa.visible || !pb.visible) {
    return false;
  }
  ctx.moveTo(pa.x, pa.y);
  ctx.lineTo(pb.x, pb.y);
  return true;
}

export function renderMesh(
  ctx: CanvasRenderingContext2D,
  camera: OrbitCamera,
  mesh: MeshSnapshot,
  width: number,
  height: number,
  options: RenderOptions = DEFAULT_OPTIONS,
): void {
  ctx.strokeStyle = options.meshColor;
  ctx.lineWidth = 0.6;
  ctx.beginPath();
  const v = mesh.vertices;
  for (let t = 0; t < mesh.triangles.length; t += 3) {
    const [i, j, k] = [mesh.triangles[t], mesh.triangles[t + 1], mesh.triangles[t + 2]];
    const pi: Vec3 = [v[3 * i], v[3 * i + 1], v[3 * i + 2]];
    const pj: Vec3 = [v[3 * j], v[3 * j + 1], v[3 * j + 2]];
    const pk: Vec3 = [v[3 * k], v[3 * k + 1], v[3 * k + 2]];
    segment(ctx, camera, pi, pj, width, height);
    segment(ctx, camera, pj, pk, width, height);
    segment(ctx, camera, pk, pi, width, height);
  }
  ctx.stroke();
}

export function renderWitnesses(
  ctx: CanvasRenderingContext2D,
  camera: OrbitCamera,
  witnesses: WitnessSegment[],
  width: number,
  height: number,
  options: RenderOptions = DEFAULT_OPTIONS,
): void {
  for (const group of [false, true]) {
    ctx.strokeStyle = group ? options.grazingColor : options.witnessColor;
    ctx.lineWidth = group ? 1.5 : 2.5;
    ctx.beginPath();
    for (const w of witnesses) {
      if (w.grazing === group) {
        segment(ctx, camera, w.a, w.b, width, height);
      }
    }
    ctx.stroke();
  }
}

export function renderControlPolygon(
  ctx: CanvasRenderingContext2D,
  camera: OrbitCamera,
  store: ViewerStore,
  width: number,
  height: number,
  options: RenderOptions = DEFAULT_OPTIONS,
): void {
  const points = store.displayedPoints();
  ctx.strokeStyle = options.pointColor;
  ctx.lineWidth = 1.0;
  ctx.setLineDash(store.hasPendingPreview() ? [5, 4] : []);
  ctx.beginPath();
  const count = store.closed ? points.length : points.length - 1;
  for (let i = 0; i < count; i += 1) {
    const a = points[i];
    const b = points[(i + 1) % points.length];
    segment(ctx, camera, a as unknown as Vec3, b as unknown as Vec3, width, height);
  }
  ctx.stroke();
  ctx.setLineDash([]);

  points.forEach((p, i) => {
    const proj = camera.project(p as unknown as Vec3, width, height);
    if (!proj.visible) {
      return;
    }
    const pending =
      store.hasPendingPreview() && store.optimistic !== null && store.optimistic.index === i;
    ctx.fillStyle = pending
      ? options.pendingColor
      : i === store.selected
        ? options.selectedColor
        : options.pointColor;
    ctx.beginPath();
    ctx.arc(proj.x, proj.y, pending ? 6 : 4, 0, 2 * Math.PI);
    ctx.fill();
  });
}

export function renderScene(
  ctx: CanvasRenderingContext2D,
  camera: OrbitCamera,
  store: ViewerStore,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  if (store.mesh !== null) {
    renderMesh(ctx, camera, store.mesh, width, height);
  }
  if (store.overlays.witnesses && store.mesh !== null) {
    renderWitnesses(ctx, camera, store.displayedWitnesses(), width, height);
  }
  if (store.overlays.controlPolygon) {
    renderControlPolygon(ctx, camera, store, width, height);
  }
}
