// Immediate-mode scene drawing over a minimal 2D-context interface, so tests
// can record draw calls without a real canvas. Items draw in ascending level
// order (document order breaks ties), which puts deeper images on top and
// makes the last hit in the draw list the topmost image under the cursor.

import { LayoutDocument, LayoutItem } from "./types.js";
import { RectState } from "./viewmodel.js";

const GOLDEN_ANGLE = 137.50776405003785;
const ROOT_FILL = "hsl(0, 0%, 55%)";

export interface ScenePainter {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
  drawImage?(image: unknown, x: number, y: number, w: number, h: number): void;
}

export interface DrawnRect {
  id: string;
  left: number;
  top: number;
  w: number;
  h: number;
}

export interface SceneOptions {
  hoverId?: string | null;
  selectedId?: string | null;
  images?: Map<string, unknown>;
}

/** Fill color per item: the root is neutral, every level-1 branch gets its
 *  own hue in branch order. Deterministic for a given document. */
export function branchColors(doc: LayoutDocument): Map<string, string> {
  const byId = new Map(doc.items.map((item) => [item.id, item]));
  const hues = new Map<string, number>();
  const colors = new Map<string, string>();
  for (const item of doc.items) {
    let node: LayoutItem = item;
    while (node.parent !== node.id && byId.get(node.parent)!.parent !== node.parent) {
      node = byId.get(node.parent)!;
    }
    if (node.parent === node.id) {
      colors.set(item.id, ROOT_FILL);
      continue;
    }
    if (!hues.has(node.id)) {
      hues.set(node.id, (hues.size * GOLDEN_ANGLE) % 360);
    }
    colors.set(item.id, `hsl(${hues.get(node.id)!.toFixed(1)}, 65%, 62%)`);
  }
  return colors;
}

export function drawOrder(doc: LayoutDocument): LayoutItem[] {
  return doc.items
    .map((item, index) => ({ item, index }))
    .sort((a, b) => a.item.level - b.item.level || a.index - b.index)
    .map((entry) => entry.item);
}

export function drawShapeOutline(ctx: ScenePainter, doc: LayoutDocument): void {
  const points = doc.shape.points;
  ctx.strokeStyle = "#222";
  ctx.lineWidth = 1.5;
  if (points && points.length >= 3) {
    ctx.beginPath();
    ctx.moveTo(points[0][0], points[0][1]);
    for (let i = 1; i < points.length; i++) ctx.lineTo(points[i][0], points[i][1]);
    ctx.closePath();
    ctx.stroke();
    return;
  }
  const [x0, y0, x1, y1] = doc.shape.bbox;
  ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
}

/** Draw every item at its animated rectangle; returns the draw list for hit
 *  testing. Rect coordinates are used exactly as given (center-based in the
 *  document, corner-based on the canvas). */
export function drawScene(
  ctx: ScenePainter,
  doc: LayoutDocument,
  rects: Map<string, RectState>,
  opts: SceneOptions = {},
): DrawnRect[] {
  const colors = branchColors(doc);
  const drawn: DrawnRect[] = [];
  drawShapeOutline(ctx, doc);
  for (const item of drawOrder(doc)) {
    const rect = rects.get(item.id);
    if (!rect) continue;
    const left = rect.x - rect.w / 2;
    const top = rect.y - rect.h / 2;
    const image = opts.images?.get(item.id);
    if (image && ctx.drawImage) {
      ctx.drawImage(image, left, top, rect.w, rect.h);
    } else {
      ctx.fillStyle = colors.get(item.id)!;
      ctx.fillRect(left, top, rect.w, rect.h);
    }
    const highlighted = item.id === opts.selectedId || item.id === opts.hoverId;
    ctx.strokeStyle = highlighted ? "#000" : "#333";
    ctx.lineWidth = highlighted ? 2 : 0.5;
    ctx.strokeRect(left, top, rect.w, rect.h);
    drawn.push({ id: item.id, left, top, w: rect.w, h: rect.h });
  }
  return drawn;
}

/** Topmost image under a point, or null. */
export function hitTest(drawn: DrawnRect[], x: number, y: number): string | null {
  for (let i = drawn.length - 1; i >= 0; i--) {
    const r = drawn[i];
    if (x >= r.left && x <= r.left + r.w && y >= r.top && y <= r.top + r.h) {
      return r.id;
    }
  }
  return null;
}
