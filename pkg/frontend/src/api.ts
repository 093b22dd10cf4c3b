/** Typed client for the knotmorph session service (schema knotmorph.service/1).
 *
 * Every response carries the session revision it was computed from; the
 * store keeps those tags so stale data is always recognizable.
 */

export type Vec3 = [number, number, number];

export interface Verdict {
  code: string;
  message: string;
}

export interface PointsResponse {
  revision: number;
  points: number[][];
  closed: boolean;
}

export interface WitnessLists {
  pairs: number[][];
  grazing: number[][];
}

export interface MeshResponse {
  revision: number;
  s: number;
  v_steps: number;
  vertices: number[];
  triangles: number[];
  uv: number[];
  witnesses: WitnessLists;
  report: {
    pairs: number;
    grazing: number;
    tested_pairs: number;
    excluded_adjacent: number;
  };
}

export interface TransitionPayload {
  found: boolean;
  already_intersecting?: boolean;
  s_lo?: number;
  s_hi?: number;
  width?: number;
  pairs_at_hi?: number;
  self_proximity_at_hi?: number;
  grid?: number;
  v_steps?: number;
  eps?: number;
}

export interface JobResponse {
  job: string;
  status: "queued" | "running" | "done" | "failed" | "cancelled";
  progress: [number, number];
  result: TransitionPayload | null;
  base_revision: number;
  revision: number;
  message?: string | null;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: { error?: string; message?: string; verdict?: Verdict[]; revision?: number },
  ) {
    super(body.message ?? `HTTP ${status}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, body);
  }
  return body as T;
}

export class SessionApi {
  constructor(
    readonly baseUrl: string,
    readonly sessionId: string,
  ) {}

  static async create(
    baseUrl: string,
    source: { corpus?: string; knot_text?: string },
  ): Promise<SessionApi> {
    const body = await request<{ session: string }>(`${baseUrl}/sessions`, {
      method: "POST",
      body: JSON.stringify(source),
    });
    return new SessionApi(baseUrl, body.session);
  }

  private url(rest: string): string {
    return `${this.baseUrl}/sessions/${this.sessionId}${rest}`;
  }

  getPoints(): Promise<PointsResponse> {
    return request(this.url("/points"));
  }

  putPoints(points: number[][], baseRevision: number): Promise<{ revision: number }> {
    return request(this.url("/points"), {
      method: "PUT",
      body: JSON.stringify({ points, base_revision: baseRevision }),
    });
  }

  insertPoint(
    segmentIndex: number,
    fraction: number,
    baseRevision: number,
  ): Promise<{ revision: number; points: number[][] }> {
    return request(this.url("/points/insert"), {
      method: "POST",
      body: JSON.stringify({
        segment_index: segmentIndex,
        fraction,
        base_revision: baseRevision,
      }),
    });
  }

  refine(baseRevision: number): Promise<{ revision: number; points: number[][] }> {
    return request(this.url("/points/refine"), {
      method: "POST",
      body: JSON.stringify({ base_revision: baseRevision }),
    });
  }

  setMorph(
    config: {
      target_corpus?: string;
      samples?: number;
      v_steps?: number;
      eps?: number;
      seed?: number;
    },
    baseRevision: number,
  ): Promise<{ revision: number }> {
    return request(this.url("/morph"), {
      method: "PUT",
      body: JSON.stringify({ ...config, base_revision: baseRevision }),
    });
  }

  getMesh(s: number, vSteps?: number): Promise<MeshResponse> {
    const extra = vSteps === undefined ? "" : `&v_steps=${vSteps}`;
    return request(this.url(`/mesh?s=${s}${extra}`));
  }

  getCurve(s: number): Promise<{ revision: number; samples: number[][]; closed: boolean }> {
    return request(this.url(`/curve?s=${s}`));
  }

  startJob(grid: number, tol: number, baseRevision: number): Promise<JobResponse> {
    return request(this.url("/jobs"), {
      method: "POST",
      body: JSON.stringify({ grid, tol, base_revision: baseRevision }),
    });
  }

  getJob(jobId: string): Promise<JobResponse> {
    return request(this.url(`/jobs/${jobId}`));
  }

  cancelJob(jobId: string): Promise<JobResponse> {
    return request(this.url(`/jobs/${jobId}`), { method: "DELETE" });
  }

  getDocument(): Promise<Record<string, unknown>> {
    return request(this.url("/document"));
  }

  async pollJob(jobId: string, intervalMs = 150, timeoutMs = 300_000): Promise<JobResponse> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const job = await this.getJob(jobId);
      if (job.status === "done" || job.status === "failed" || job.status === "cancelled") {
        return job;
      }
      if (Date.now() > deadline) {
        throw new Error(`job ${jobId} did not finish within ${timeoutMs} ms`);
      }
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }
}
