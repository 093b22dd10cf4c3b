/** Model for the s-timeline: predicate markers plus the refined bracket.
 *
 * The timeline is the "moment in time" affordance: green markers where the
 * surface was embedded, red where it self-intersected, amber for grazing
 * contacts, and a shaded span for the bracket the transition search
 * produced.
 */
import { Bracket } from "./state.js";

export type MarkerKind = "embedded" | "intersecting" | "grazing";

export interface Marker {
  s: number;
  kind: MarkerKind;
  pairs: number;
}

export class Timeline {
  markers: Marker[] = [];
  bracket: Bracket | null = null;

  record(s: number, pairs: number, grazing: number): void {
    let kind: MarkerKind = "embedded";
    if (pairs > 0) {
      kind = "intersecting";
    } else if (grazing > 0) {
      kind = "grazing";
    }
    const existing = this.markers.findIndex((m) => m.s === s);
    const marker = { s, kind, pairs };
    if (existing >= 0) {
      this.markers[existing] = marker;
    } else {
      this.markers.push(marker);
      this.markers.sort((a, b) => a.s - b.s);
    }
  }

  setBracket(bracket: Bracket | null): void {
    this.bracket = bracket;
  }

  /** Display contract: the bracket's timeline position is its midpoint. */
  bracketMidpoint(): number | null {
    if (this.bracket === null) {
      return null;
    }
    return (this.bracket.sLo + this.bracket.sHi) / 2;
  }

  /** First marker at or after the bracket that shows an intersection. */
  firstIntersectingMarker(): Marker | null {
    return this.markers.find((m) => m.kind === "intersecting") ?? null;
  }

  /** Snap a requested s to the nearest recorded marker (slider feel). */
  nearestMarker(s: number): Marker | null {
    if (this.markers.length === 0) {
      return null;
    }
    let best = this.markers[0];
    for (const m of this.markers) {
      if (Math.abs(m.s - s) < Math.abs(best.s - s)) {
        best = m;
      }
    }
    return best;
  }
}
