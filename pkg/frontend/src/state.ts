/** Viewer state: authoritative service snapshots plus an optimistic drag
 * layer.
 *
 * The viewer holds no geometry truth. Control points and meshes displayed
 * come verbatim from service responses, tagged with the revision they were
 * computed from; the only client-side geometry is the optimistic preview of
 * a drag in progress, which is visually flagged until the commit round-trip
 * replaces it with the authoritative state. Mutations are single-flight:
 * edits made while a commit is pending coalesce into one follow-up commit.
 */
import {
  ApiError,
  JobResponse,
  MeshResponse,
  PointsResponse,
  TransitionPayload,
  Verdict,
  Vec3,
} from "./api.js";

/** The slice of the service client the store depends on; SessionApi
 * satisfies it structurally, tests can substitute a scripted fake. */
export interface SessionClient {
  getPoints(): Promise<PointsResponse>;
  putPoints(points: number[][], baseRevision: number): Promise<{ revision: number }>;
  insertPoint(segmentIndex: number, fraction: number, baseRevision: number):
    Promise<{ revision: number; points: number[][] }>;
  refine(baseRevision: number): Promise<{ revision: number; points: number[][] }>;
  setMorph(
    config: { target_corpus?: string; samples?: number; v_steps?: number },
    baseRevision: number,
  ): Promise<{ revision: number }>;
  getMesh(s: number, vSteps?: number): Promise<MeshResponse>;
  startJob(grid: number, tol: number, baseRevision: number): Promise<JobResponse>;
  pollJob(jobId: string, intervalMs?: number, timeoutMs?: number): Promise<JobResponse>;
}

export interface WitnessSegment {
  a: Vec3;
  b: Vec3;
  grazing: boolean;
}

export interface MeshSnapshot {
  revision: number;
  s: number;
  vSteps: number;
  vertices: number[];
  triangles: number[];
  uv: number[];
  witnesses: WitnessSegment[];
  pairCount: number;
  grazingCount: number;
}

export interface OverlayToggles {
  witnesses: boolean;
  rulings: boolean;
  controlPolygon: boolean;
}

export interface Bracket {
  sLo: number;
  sHi: number;
  alreadyIntersecting: boolean;
  pairsAtHi: number;
}

function witnessSegments(mesh: MeshResponse): WitnessSegment[] {
  const unpack = (rows: number[][], grazing: boolean): WitnessSegment[] =>
    rows.map((w) => ({
      a: [w[0], w[1], w[2]] as Vec3,
      b: [w[3], w[4], w[5]] as Vec3,
      grazing,
    }));
  return [
    ...unpack(mesh.witnesses.pairs, false),
    ...unpack(mesh.witnesses.grazing, true),
  ];
}

export function snapshotFromResponse(mesh: MeshResponse): MeshSnapshot {
  return {
    revision: mesh.revision,
    s: mesh.s,
    vSteps: mesh.v_steps,
    vertices: mesh.vertices,
    triangles: mesh.triangles,
    uv: mesh.uv,
    witnesses: witnessSegments(mesh),
    pairCount: mesh.report.pairs,
    grazingCount: mesh.report.grazing,
  };
}

export class ViewerStore {
  points: number[][] = [];
  closed = true;
  revision = 0;

  selected: number | null = null;
  optimistic: { index: number; position: Vec3 } | null = null;
  commitBlocked: Verdict[] | null = null;

  mesh: MeshSnapshot | null = null;
  currentS = 0;
  bracket: Bracket | null = null;
  jobProgress: [number, number] | null = null;

  overlays: OverlayToggles = {
    witnesses: true,
    rulings: false,
    controlPolygon: true,
  };

  private inflight: Promise<void> | null = null;
  private queuedCommit = false;

  constructor(readonly api: SessionClient) {}

  /** Pull the authoritative control points (drops any optimistic preview). */
  async syncPoints(): Promise<void> {
    const response = await this.api.getPoints();
    this.points = response.points;
    this.closed = response.closed;
    this.revision = response.revision;
    this.optimistic = null;
  }

  /** Points as displayed: authoritative, with the drag preview merged in. */
  displayedPoints(): number[][] {
    if (this.optimistic === null) {
      return this.points;
    }
    const merged = this.points.map((p) => [...p]);
    merged[this.optimistic.index] = [...this.optimistic.position];
    return merged;
  }

  /** True while the displayed geometry contains unconfirmed local edits. */
  hasPendingPreview(): boolean {
    return this.optimistic !== null;
  }

  beginDrag(index: number): void {
    this.selected = index;
    this.optimistic = {
      index,
      position: [...this.points[index]] as Vec3,
    };
    this.commitBlocked = null;
  }

  dragTo(position: Vec3): void {
    if (this.optimistic === null) {
      throw new Error("dragTo without beginDrag");
    }
    this.optimistic = { index: this.optimistic.index, position };
  }

  cancelDrag(): void {
    this.optimistic = null;
    this.commitBlocked = null;
  }

  /** Commit the optimistic preview; single-flight with coalescing. */
  commitDrag(): Promise<void> {
    if (this.inflight !== null) {
      this.queuedCommit = true;
      return this.inflight;
    }
    const run = this.performCommit().finally(() => {
      this.inflight = null;
      if (this.queuedCommit) {
        this.queuedCommit = false;
        if (this.optimistic !== null) {
          void this.commitDrag();
        }
      }
    });
    this.inflight = run;
    return run;
  }

  private async performCommit(): Promise<void> {
    const committing = this.optimistic;
    if (committing === null) {
      return;
    }
    const candidate = this.displayedPoints();
    try {
      const outcome = await this.api.putPoints(candidate, this.revision);
      this.points = candidate;
      this.revision = outcome.revision;
      if (this.optimistic === committing) {
        // edits made while this commit was in flight stay pending; the
        // queued follow-up commit picks them up
        this.optimistic = null;
      }
      this.commitBlocked = null;
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        // invalid geometry: keep the preview on screen, block the commit,
        // and surface the verdict inline
        this.commitBlocked = error.body.verdict ?? [];
        return;
      }
      if (error instanceof ApiError && error.status === 409) {
        // lost the compare-and-set race: authoritative state wins
        await this.syncPoints();
        return;
      }
      throw error;
    }
  }

  async insertOnSegment(segmentIndex: number, fraction: number): Promise<void> {
    const outcome = await this.api.insertPoint(segmentIndex, fraction, this.revision);
    this.points = outcome.points;
    this.revision = outcome.revision;
    this.optimistic = null;
  }

  async refineAll(): Promise<void> {
    const outcome = await this.api.refine(this.revision);
    this.points = outcome.points;
    this.revision = outcome.revision;
    this.optimistic = null;
  }

  async setMorphTarget(targetCorpus: string, samples = 64, vSteps = 8): Promise<void> {
    const outcome = await this.api.setMorph(
      { target_corpus: targetCorpus, samples, v_steps: vSteps },
      this.revision,
    );
    this.revision = outcome.revision;
  }

  /** Scrub the morph parameter: fetch and display the authoritative mesh. */
  async scrubTo(s: number): Promise<MeshSnapshot> {
    const response = await this.api.getMesh(s);
    const snapshot = snapshotFromResponse(response);
    this.currentS = s;
    this.mesh = snapshot;
    return snapshot;
  }

  displayedWitnesses(): WitnessSegment[] {
    if (!this.overlays.witnesses || this.mesh === null) {
      return [];
    }
    return this.mesh.witnesses;
  }

  async runTransitionSearch(grid = 64, tol = 1e-6): Promise<Bracket | null> {
    const started = await this.api.startJob(grid, tol, this.revision);
    const finished = await this.api.pollJob(started.job);
    this.jobProgress = finished.progress;
    if (finished.status !== "done" || finished.result === null) {
      return null;
    }
    this.bracket = bracketFromTransition(finished.result);
    // job completion commits its result into the session document
    this.revision = finished.revision;
    return this.bracket;
  }
}

export function bracketFromTransition(payload: TransitionPayload): Bracket | null {
  if (!payload.found) {
    return null;
  }
  return {
    sLo: payload.s_lo ?? 0,
    sHi: payload.s_hi ?? 0,
    alreadyIntersecting: payload.already_intersecting ?? false,
    pairsAtHi: payload.pairs_at_hi ?? 0,
  };
}
