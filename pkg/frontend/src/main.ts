/** DOM shell: wires the store, camera, renderer and timeline to the page.
 *
 * One in-flight mutation at a time (the store coalesces), authoritative
 * redraw after every committed edit, and the s-slider always fetches the
 * service's mesh rather than interpolating anything locally.
 */
import { SessionApi } from "./api.js";
import { OrbitCamera } from "./camera.js";
import { renderScene } from "./render.js";
import { ViewerStore } from "./state.js";
import { Timeline } from "./timeline.js";

const SERVICE_URL = (window as unknown as { KNOTMORPH_URL?: string }).KNOTMORPH_URL
  ?? "http://127.0.0.1:8750";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

async function boot(): Promise<void> {
  const canvas = el<HTMLCanvasElement>("scene");
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    throw new Error("no 2d context");
  }
  const status = el<HTMLDivElement>("status");
  const verdictBox = el<HTMLDivElement>("verdict");
  const slider = el<HTMLInputElement>("s-slider");
  const sValue = el<HTMLSpanElement>("s-value");
  const timelineCanvas = el<HTMLCanvasElement>("timeline");
  const timelineCtx = timelineCanvas.getContext("2d");

  const sourceSelect = el<HTMLSelectElement>("source");
  const targetSelect = el<HTMLSelectElement>("target");

  const api = await SessionApi.create(SERVICE_URL, { corpus: sourceSelect.value });
  const store = new ViewerStore(api);
  const camera = new OrbitCamera();
  const timeline = new Timeline();

  await store.syncPoints();
  await store.setMorphTarget(targetSelect.value);
  camera.frame(store.points);

  const draw = (): void => {
    renderScene(ctx, camera, store, canvas.width, canvas.height);
    drawTimeline();
    const blocked = store.commitBlocked;
    verdictBox.textContent = blocked === null
      ? ""
      : `commit blocked: ${blocked.map((v) => v.message).join("; ")}`;
    status.textContent =
      `revision ${store.revision} | s=${store.currentS.toFixed(6)} | ` +
      (store.mesh === null
        ? "no mesh"
        : `${store.mesh.pairCount} witness pairs, ${store.mesh.grazingCount} grazing`) +
      (store.hasPendingPreview() ? " | PREVIEW (uncommitted)" : "");
  };

  const drawTimeline = (): void => {
    if (timelineCtx === null) {
      return;
    }
    const { width, height } = timelineCanvas;
    timelineCtx.clearRect(0, 0, width, height);
    timelineCtx.strokeStyle = "#888";
    timelineCtx.beginPath();
    timelineCtx.moveTo(10, height / 2);
    timelineCtx.lineTo(width - 10, height / 2);
    timelineCtx.stroke();
    const toX = (s: number): number => 10 + s * (width - 20);
    if (timeline.bracket !== null) {
      timelineCtx.fillStyle = "rgba(224, 163, 37, 0.7)";
      const a = toX(timeline.bracket.sLo);
      const b = toX(timeline.bracket.sHi);
      timelineCtx.fillRect(a - 2, 4, Math.max(b - a, 4), height - 8);
    }
    for (const m of timeline.markers) {
      timelineCtx.fillStyle = m.kind === "intersecting"
        ? "#c22f2f"
        : m.kind === "grazing"
          ? "#e0a325"
          : "#3b7d3b";
      timelineCtx.beginPath();
      timelineCtx.arc(toX(m.s), height / 2, 4, 0, 2 * Math.PI);
      timelineCtx.fill();
    }
    timelineCtx.fillStyle = "#222";
    timelineCtx.fillRect(toX(store.currentS) - 1, 2, 2, height - 4);
  };

  const scrub = async (s: number): Promise<void> => {
    slider.value = String(s);
    sValue.textContent = s.toFixed(6);
    const mesh = await store.scrubTo(s);
    timeline.record(s, mesh.pairCount, mesh.grazingCount);
    draw();
  };

  // --- pointer interaction: orbit (background) and point dragging --------
  let dragging: { kind: "orbit" | "point"; lastX: number; lastY: number } | null = null;

  canvas.addEventListener("pointerdown", (event) => {
    const rect = canvas.getBoundingClientRect();
    const px = event.clientX - rect.left;
    const py = event.clientY - rect.top;
    const picked = camera.pick(store.displayedPoints(), px, py,
      canvas.width, canvas.height);
    if (picked !== null) {
      store.beginDrag(picked);
      dragging = { kind: "point", lastX: px, lastY: py };
    } else {
      dragging = { kind: "orbit", lastX: px, lastY: py };
    }
    canvas.setPointerCapture(event.pointerId);
  });

  canvas.addEventListener("pointermove", (event) => {
    if (dragging === null) {
      return;
    }
    const rect = canvas.getBoundingClientRect();
    const px = event.clientX - rect.left;
    const py = event.clientY - rect.top;
    const dx = px - dragging.lastX;
    const dy = py - dragging.lastY;
    dragging.lastX = px;
    dragging.lastY = py;
    if (dragging.kind === "orbit") {
      camera.rotate(dx * 0.01, dy * 0.01);
    } else if (store.optimistic !== null) {
      const current = store.displayedPoints()[store.optimistic.index];
      store.dragTo(camera.dragInViewPlane(
        [current[0], current[1], current[2]], dx, dy, canvas.height));
    }
    draw();
  });

  canvas.addEventListener("pointerup", () => {
    if (dragging?.kind === "point") {
      void store.commitDrag().then(async () => {
        if (store.mesh !== null) {
          await scrub(store.currentS); // authoritative mesh after the edit
        } else {
          draw();
        }
      });
    }
    dragging = null;
  });

  canvas.addEventListener("wheel", (event) => {
    event.preventDefault();
    camera.zoom(event.deltaY > 0 ? 1.1 : 1 / 1.1);
    draw();
  });

  canvas.addEventListener("dblclick", (event) => {
    // insert a collinear point at the middle of the segment nearest the click
    const rect = canvas.getBoundingClientRect();
    const px = event.clientX - rect.left;
    const py = event.clientY - rect.top;
    const points = store.displayedPoints();
    const count = store.closed ? points.length : points.length - 1;
    let best = 0;
    let bestDist = Infinity;
    for (let i = 0; i < count; i += 1) {
      const a = points[i];
      const b = points[(i + 1) % points.length];
      const mid: [number, number, number] = [
        (a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2];
      const proj = camera.project(mid, canvas.width, canvas.height);
      const d = Math.hypot(proj.x - px, proj.y - py);
      if (proj.visible && d < bestDist) {
        bestDist = d;
        best = i;
      }
    }
    void store.insertOnSegment(best, 0.5).then(draw);
  });

  slider.addEventListener("input", () => {
    void scrub(Number(slider.value));
  });

  el<HTMLButtonElement>("refine").addEventListener("click", () => {
    void store.refineAll().then(draw);
  });

  el<HTMLButtonElement>("search").addEventListener("click", () => {
    status.textContent = "transition search running...";
    void store.runTransitionSearch().then(async (bracket) => {
      timeline.setBracket(bracket);
      if (bracket !== null && !bracket.alreadyIntersecting) {
        await scrub(bracket.sLo);
        await scrub(bracket.sHi);
      }
      draw();
    });
  });

  el<HTMLButtonElement>("download").addEventListener("click", () => {
    void api.getDocument().then((doc) => {
      const blob = new Blob([JSON.stringify(doc, null, 2)],
        { type: "application/json" });
      const a = document.createElement("a");
      a.href = URL.createObjectURL(blob);
      a.download = "session.json";
      a.click();
      URL.revokeObjectURL(a.href);
    });
  });

  await scrub(0);
}

boot().catch((error) => {
  const status = document.getElementById("status");
  if (status !== null) {
    status.textContent = `failed to start: ${error}`;
  }
});
