/** Orbit camera and perspective projection for the canvas renderer. */
import { Vec3 } from "./api.js";

export interface Projected {
  x: number;
  y: number;
  depth: number;
  visible: boolean;
}

export class OrbitCamera {
  constructor(
    public yaw = 0.6,
    public pitch = 0.35,
    public distance = 12,
    public target: Vec3 = [0, 0, 0],
    public fov = Math.PI / 4,
  ) {}

  rotate(dYaw: number, dPitch: number): void {
    this.yaw += dYaw;
    const limit = Math.PI / 2 - 1e-3;
    this.pitch = Math.min(limit, Math.max(-limit, this.pitch + dPitch));
  }

  zoom(factor: number): void {
    this.distance = Math.min(1e4, Math.max(1e-2, this.distance * factor));
  }

  /** World point -> camera frame (x right, y up, z toward the viewer). */
  toCamera(p: Vec3): Vec3 {
    const cy = Math.cos(this.yaw);
    const sy = Math.sin(this.yaw);
    const cp = Math.cos(this.pitch);
    const sp = Math.sin(this.pitch);
    const dx = p[0] - this.target[0];
    const dy = p[1] - this.target[1];
    const dz = p[2] - this.target[2];
    // yaw about +z, then pitch about the camera's x axis
    const rx = cy * dx + sy * dy;
    const ry = -sy * dx + cy * dy;
    const x = rx;
    const y = cp * dz - sp * ry;
    const z = -(cp * ry + sp * dz) + this.distance;
    return [x, y, z];
  }

  /** Project into pixel coordinates on a width x height canvas. */
  project(p: Vec3, width: number, height: number): Projected {
    const [x, y, z] = this.toCamera(p);
    if (z <= 1e-6) {
      return { x: 0, y: 0, depth: z, visible: false };
    }
    const scale = (0.5 * height) / Math.tan(this.fov / 2);
    return {
      x: width / 2 + (scale * x) / z,
      y: height / 2 - (scale * y) / z,
      depth: z,
      visible: true,
    };
  }

  /** Frame the camera so all points fit comfortably. */
  frame(points: number[][]): void {
    if (points.length === 0) {
      return;
    }
    const lo: Vec3 = [Infinity, Infinity, Infinity];
    const hi: Vec3 = [-Infinity, -Infinity, -Infinity];
    for (const p of points) {
      for (let k = 0; k < 3; k += 1) {
        lo[k] = Math.min(lo[k], p[k]);
        hi[k] = Math.max(hi[k], p[k]);
      }
    }
    this.target = [(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, (lo[2] + hi[2]) / 2];
    const radius = Math.max(
      Math.hypot(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]) / 2,
      1e-6,
    );
    this.distance = (radius / Math.tan(this.fov / 2)) * 1.4;
  }

  /** Index of the displayed point nearest to a canvas position, within
   * a pick radius; used for drag targeting. */
  pick(
    points: number[][],
    px: number,
    py: number,
    width: number,
    height: number,
    radius = 12,
  ): number | null {
    let best: number | null = null;
    let bestDist = radius;
    points.forEach((p, i) => {
      const proj = this.project([p[0], p[1], p[2]], width, height);
      if (!proj.visible) {
        return;
      }
      const d = Math.hypot(proj.x - px, proj.y - py);
      if (d < bestDist) {
        bestDist = d;
        best = i;
      }
    });
    return best;
  }

  /** Move a world point parallel to the view plane by a pixel delta; this
   * is the optimistic preview geometry for dragging control points. */
  dragInViewPlane(
    p: Vec3,
    dxPixels: number,
    dyPixels: number,
    height: number,
  ): Vec3 {
    const cam = this.toCamera(p);
    const scale = (0.5 * height) / Math.tan(this.fov / 2);
    const worldPerPixel = cam[2] / scale;
    const cy = Math.cos(this.yaw);
    const sy = Math.sin(this.yaw);
    const cp = Math.cos(this.pitch);
    const sp = Math.sin(this.pitch);
    // camera right = (cy, sy, 0), camera up = (sp*sy, -sp*cy, cp) in world
    const right: Vec3 = [cy, sy, 0];
    const up: Vec3 = [sp * sy, -sp * cy, cp];
    const du = dxPixels * worldPerPixel;
    const dv = -dyPixels * worldPerPixel;
    return [
      p[0] + du * right[0] + dv * up[0],
      p[1] + du * right[1] + dv * up[1],
      p[2] + du * right[2] + dv * up[2],
    ];
  }
}
