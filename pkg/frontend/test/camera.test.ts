import { describe, expect, it } from "vitest";

import { OrbitCamera } from "../src/camera.js";

describe("OrbitCamera", () => {
  it("projects the target to the canvas center", () => {
    const cam = new OrbitCamera(0.3, 0.2, 10, [1, 2, 3]);
    const p = cam.project([1, 2, 3], 800, 600);
    expect(p.visible).toBe(true);
    expect(p.x).toBeCloseTo(400, 6);
    expect(p.y).toBeCloseTo(300, 6);
    expect(p.depth).toBeCloseTo(10, 6);
  });

  it("keeps depth ordering along the view axis", () => {
    const cam = new OrbitCamera(0, 0, 5, [0, 0, 0]);
    // with yaw=pitch=0 the camera looks along -y toward the target
    const near = cam.toCamera([0, 1, 0]);
    const far = cam.toCamera([0, -1, 0]);
    expect(near[2]).toBeLessThan(far[2]);
    expect(near[2]).toBeGreaterThan(0);
  });

  it("zoom scales the projected offset", () => {
    const cam = new OrbitCamera(0, 0, 10, [0, 0, 0]);
    const before = cam.project([1, 0, 0], 800, 600);
    cam.zoom(2);
    const after = cam.project([1, 0, 0], 800, 600);
    expect(Math.abs(after.x - 400)).toBeLessThan(Math.abs(before.x - 400));
  });

  it("culls points behind the camera", () => {
    const cam = new OrbitCamera(0, 0, 1, [0, 0, 0]);
    const p = cam.project([0, 5, 0], 800, 600);
    expect(p.visible).toBe(false);
  });

  it("clamps pitch at the poles", () => {
    const cam = new OrbitCamera();
    cam.rotate(0, 10);
    expect(cam.pitch).toBeLessThan(Math.PI / 2);
    cam.rotate(0, -20);
    expect(cam.pitch).toBeGreaterThan(-Math.PI / 2);
  });

  it("frames a point cloud around its center", () => {
    const cam = new OrbitCamera();
    cam.frame([[0, 0, 0], [2, 0, 0], [0, 4, 0], [0, 0, 6]]);
    expect(cam.target).toEqual([1, 2, 3]);
    const projected = [[0, 0, 0], [2, 0, 0], [0, 4, 0], [0, 0, 6]].map((p) =>
      cam.project([p[0], p[1], p[2]], 800, 600));
    for (const p of projected) {
      expect(p.visible).toBe(true);
      expect(p.x).toBeGreaterThan(0);
      expect(p.x).toBeLessThan(800);
      expect(p.y).toBeGreaterThan(0);
      expect(p.y).toBeLessThan(600);
    }
  });

  it("picks the nearest projected point within the radius", () => {
    const cam = new OrbitCamera(0, 0, 10, [0, 0, 0]);
    const points = [[0, 0, 0], [1, 0, 0], [0, 0, 1]];
    const origin = cam.project([0, 0, 0], 800, 600);
    expect(cam.pick(points, origin.x, origin.y, 800, 600)).toBe(0);
    expect(cam.pick(points, origin.x + 200, origin.y + 200, 800, 600)).toBeNull();
  });

  it("drag in the view plane preserves depth", () => {
    const cam = new OrbitCamera(0.7, 0.4, 8, [0, 0, 0]);
    const moved = cam.dragInViewPlane([1, 1, 1], 25, -13, 600);
    const before = cam.toCamera([1, 1, 1]);
    const after = cam.toCamera(moved);
    expect(after[2]).toBeCloseTo(before[2], 9);
    // and moves in the requested screen direction
    const pBefore = cam.project([1, 1, 1], 800, 600);
    const pAfter = cam.project(moved, 800, 600);
    expect(pAfter.x).toBeGreaterThan(pBefore.x);
    expect(pAfter.y).toBeLessThan(pBefore.y);
  });
});
