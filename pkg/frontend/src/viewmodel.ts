// View state: the committed layout document, the rectangle animation between
// documents, the selection, and the single-in-flight focus request guard.
//
// Time is passed in explicitly (milliseconds) so the animation is a pure
// function of (committed document, previous rects, now); once settled the
// returned rectangles are the document values verbatim, not interpolations.

import { FocusApi } from "./api.js";
import { LayoutDocument } from "./types.js";

export const FOCUS_ANIMATION_MS = 300;

export interface RectState {
  x: number;
  y: number;
  w: number;
  h: number;
}

export type ClickOutcome = "committed" | "ignored" | "failed";

interface Animation {
  startMs: number;
  from: Map<string, RectState>;
}

export class ViewModel {
  private committed: LayoutDocument | null = null;
  private animation: Animation | null = null;
  requestInFlight = false;
  selectedId: string | null = null;
  lastError: string | null = null;

  constructor(private readonly api: FocusApi) {}

  get document(): LayoutDocument | null {
    return this.committed;
  }

  /** Adopt a new layout document, animating from whatever is on screen. */
  commit(doc: LayoutDocument, nowMs: number): void {
    const from = this.committed ? this.rectsAt(nowMs) : new Map<string, RectState>();
    this.committed = doc;
    this.animation = from.size > 0 ? { startMs: nowMs, from } : null;
  }

  settled(nowMs: number): boolean {
    return this.animation === null || nowMs - this.animation.startMs >= FOCUS_ANIMATION_MS;
  }

  /** Rectangles to draw at a moment: linear interpolation of center and size
   *  over the flight, exactly the committed values once settled. */
  rectsAt(nowMs: number): Map<string, RectState> {
    const out = new Map<string, RectState>();
    if (!this.committed) return out;
    const settled = this.settled(nowMs);
    const t = settled ? 1 : (nowMs - (this.animation as Animation).startMs) / FOCUS_ANIMATION_MS;
    for (const item of this.committed.items) {
      if (settled) {
        out.set(item.id, { x: item.x, y: item.y, w: item.w, h: item.h });
        continue;
      }
      const from = this.animation?.from.get(item.id);
      if (!from) {
        out.set(item.id, { x: item.x, y: item.y, w: item.w, h: item.h });
        continue;
      }
      out.set(item.id, {
        x: from.x + (item.x - from.x) * t,
        y: from.y + (item.y - from.y) * t,
        w: from.w + (item.w - from.w) * t,
        h: from.h + (item.h - from.h) * t,
      });
    }
    return out;
  }

  /** Handle a click on an image: one focus request at a time; the clicked
   *  image stays highlighted during the flight. */
  async clickImage(imageId: string, now: () => number): Promise<ClickOutcome> {
    if (this.requestInFlight) return "ignored";
    this.requestInFlight = true;
    this.selectedId = imageId;
    this.lastError = null;
    try {
      const doc = await this.api.focus(imageId);
      this.commit(doc, now());
      return "committed";
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
      return "failed";
    } finally {
      this.requestInFlight = false;
      this.selectedId = null;
    }
  }
}
