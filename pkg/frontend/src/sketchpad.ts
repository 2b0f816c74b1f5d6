// Stroke capture for a recording session. Pointer samples arrive in screen
// pixels; they are converted to map-frame meters immediately, so nothing
// downstream ever sees a pixel. Speech text and the stroke may arrive in any
// order while the session is open.

import type { MapTransform } from "./transform.js";
import type { RecordingDocument, SketchPoint } from "./types.js";

export interface PointerSample {
  x: number; // screen px
  y: number;
  t: number; // ms
}

/** How close (meters) a stroke must start to an earlier sketch to attach. */
export const ATTACH_RADIUS = 0.75;

export class RecordingSession {
  utterance = "";
  private points: SketchPoint[] = [];
  private drawing = false;
  private t0: number | null = null;

  constructor(private readonly transform: MapTransform) {}

  setUtterance(text: string): void {
    this.utterance = text;
  }

  strokeBegin(sample: PointerSample): void {
    this.drawing = true;
    this.t0 = this.t0 ?? sample.t;
    this.push(sample);
  }

  strokeMove(sample: PointerSample): void {
    if (!this.drawing) return;
    this.push(sample);
  }

  strokeEnd(sample?: PointerSample): void {
    if (sample && this.drawing) this.push(sample);
    this.drawing = false;
  }

  private push(sample: PointerSample): void {
    const [mx, my] = this.transform.toMap(sample.x, sample.y);
    const t = sample.t - (this.t0 ?? sample.t);
    const last = this.points[this.points.length - 1];
    if (last && last[0] === mx && last[1] === my && last[2] === t) return;
    this.points.push([mx, my, Math.max(t, last ? last[2] : 0)]);
  }

  get stroke(): readonly SketchPoint[] {
    return this.points;
  }

  get isEmpty(): boolean {
    return this.points.length < 2 && this.utterance.trim() === "";
  }

  /**
   * Close the session into a recording document. Attachment is decided by
   * where the stroke starts: on (near) an earlier recording's sketch, the
   * new recording branches from it. The attachment region itself is the
   * engine's call; the client only names the host recording.
   */
  finish(id: string, earlier: readonly RecordingDocument[]): RecordingDocument {
    if (this.points.length < 2) {
      throw new Error("a recording needs a sketched stroke");
    }
    const doc: RecordingDocument = {
      format_version: "1",
      id,
      utterance: this.utterance,
      sketch: { points: [...this.points] },
    };
    const host = findAttachmentHost(this.points[0], earlier);
    if (host !== null) {
      doc.attach = { host };
    }
    return doc;
  }
}

export function findAttachmentHost(
  start: SketchPoint,
  earlier: readonly RecordingDocument[],
): string | null {
  let best: string | null = null;
  let bestDist = ATTACH_RADIUS;
  for (const recording of earlier) {
    const pts = recording.sketch.points;
    for (let i = 0; i + 1 < pts.length; i++) {
      const d = pointSegmentDistance(start, pts[i], pts[i + 1]);
      if (d <= bestDist) {
        best = recording.id;
        bestDist = d;
      }
    }
  }
  return best;
}

function pointSegmentDistance(p: SketchPoint, a: SketchPoint, b: SketchPoint): number {
  const vx = b[0] - a[0];
  const vy = b[1] - a[1];
  const wx = p[0] - a[0];
  const wy = p[1] - a[1];
  const len2 = vx * vx + vy * vy;
  const t = len2 === 0 ? 0 : Math.max(0, Math.min(1, (wx * vx + wy * vy) / len2));
  const dx = wx - t * vx;
  const dy = wy - t * vy;
  return Math.hypot(dx, dy);
}
