// Wire types for the layout service. A layout document is self-contained:
// one entry per image with its final center-based rectangle and its place
// in the tree (the root is its own parent at level 0).

export interface LayoutItem {
  id: string;
  x: number;
  y: number;
  w: number;
  h: number;
  level: number;
  parent: string;
  path?: string | null;
}

export interface ShapeEcho {
  bbox: [number, number, number, number];
  cell?: number;
  kind?: string;
  points?: [number, number][];
  [key: string]: unknown;
}

export interface LayoutDocument {
  version: number;
  generator: string;
  items: LayoutItem[];
  shape: ShapeEcho;
  objective: unknown;
  config: unknown;
}

export interface CreateCollectionResponse {
  id: string;
  revision: number;
  item_count: number;
}

export function parseLayoutDocument(raw: unknown): LayoutDocument {
  const doc = raw as LayoutDocument;
  if (!doc || doc.version !== 1 || !Array.isArray(doc.items)) {
    throw new Error("not a version-1 layout document");
  }
  for (const item of doc.items) {
    if (typeof item.id !== "string" || typeof item.x !== "number" || item.w <= 0 || item.h <= 0) {
      throw new Error(`malformed layout item ${JSON.stringify(item)}`);
    }
  }
  return doc;
}

export function rootOf(doc: LayoutDocument): LayoutItem {
  const root = doc.items.find((item) => item.parent === item.id);
  if (!root) throw new Error("layout document has no root item");
  return root;
}
