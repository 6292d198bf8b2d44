// Browser bootstrap: load a manifest, create a collection, draw the layout,
// click an image to refocus, drag the property list to rebuild the tree.

import { LayoutClient } from "./api.js";
import { drawScene, DrawnRect, hitTest } from "./render.js";
import { LayoutDocument } from "./types.js";
import { ViewModel } from "./viewmodel.js";

interface ManifestJson {
  schema: { name: string; kind: string; threshold?: number }[];
  [key: string]: unknown;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class ViewerApp {
  private client: LayoutClient;
  private vm: ViewModel | null = null;
  private collectionId: string | null = null;
  private manifest: ManifestJson | null = null;
  private canvas = el<HTMLCanvasElement>("scene");
  private ctx = this.canvas.getContext("2d")!;
  private drawn: DrawnRect[] = [];
  private hoverId: string | null = null;
  private images = new Map<string, unknown>();
  private rafPending = false;

  constructor() {
    this.client = new LayoutClient(
      (el<HTMLInputElement>("base-url").value || "http://127.0.0.1:8000").trim(),
    );
    el<HTMLInputElement>("manifest-file").addEventListener("change", (ev) => {
      const input = ev.target as HTMLInputElement;
      if (input.files?.[0]) void this.loadManifest(input.files[0]);
    });
    this.canvas.addEventListener("click", (ev) => void this.onClick(ev));
    this.canvas.addEventListener("mousemove", (ev) => this.onHover(ev));
  }

  private toast(message: string): void {
    const box = el<HTMLDivElement>("toast");
    box.textContent = message;
    box.classList.add("visible");
    setTimeout(() => box.classList.remove("visible"), 4000);
  }

  private async loadManifest(file: File): Promise<void> {
    try {
      const text = await file.text();
      this.manifest = JSON.parse(text) as ManifestJson;
      this.client = new LayoutClient(
        (el<HTMLInputElement>("base-url").value || "http://127.0.0.1:8000").trim(),
      );
      await this.createCollection();
    } catch (err) {
      this.toast(`could not load manifest: ${err}`);
    }
  }

  private async createCollection(): Promise<void> {
    if (!this.manifest) return;
    const created = await this.client.createCollection(JSON.stringify(this.manifest));
    this.collectionId = created.id;
    this.vm = new ViewModel(this.client.session(created.id));
    const doc = await this.client.getLayout(created.id);
    this.vm.commit(doc, performance.now());
    this.sizeCanvas(doc);
    this.loadImages(doc);
    this.renderSchemaList();
    this.scheduleDraw();
  }

  private sizeCanvas(doc: LayoutDocument): void {
    const [x0, y0, x1, y1] = doc.shape.bbox;
    this.canvas.width = Math.ceil(x1 - x0);
    this.canvas.height = Math.ceil(y1 - y0);
  }

  private loadImages(doc: LayoutDocument): void {
    if (!this.collectionId) return;
    for (const item of doc.items) {
      if (!item.path || this.images.has(item.id)) continue;
      const img = new Image();
      img.onload = () => {
        this.images.set(item.id, img);
        this.scheduleDraw();
      };
      img.src = this.client.imageUrl(this.collectionId, item.id);
    }
  }

  // property reorder list: move a property up to group by it earlier; every
  // change re-creates the collection with the reordered schema
  private renderSchemaList(): void {
    if (!this.manifest) return;
    const list = el<HTMLUListElement>("schema-list");
    list.innerHTML = "";
    this.manifest.schema.forEach((descriptor, index) => {
      const li = document.createElement("li");
      li.textContent = `${index + 1}. ${descriptor.name} (${descriptor.kind})`;
      const up = document.createElement("button");
      up.textContent = "↑";
      up.disabled = index === 0;
      up.addEventListener("click", () => void this.moveProperty(index));
      li.appendChild(up);
      list.appendChild(li);
    });
  }

  private async moveProperty(index: number): Promise<void> {
    if (!this.manifest || index === 0) return;
    const schema = [...this.manifest.schema];
    [schema[index - 1], schema[index]] = [schema[index], schema[index - 1]];
    this.manifest = { ...this.manifest, schema };
    try {
      await this.createCollection();
    } catch (err) {
      this.toast(`re-layout failed: ${err}`);
    }
  }

  private async onClick(ev: MouseEvent): Promise<void> {
    if (!this.vm) return;
    const id = this.pick(ev);
    if (!id) return;
    const outcome = await this.vm.clickImage(id, () => performance.now());
    if (outcome === "failed") {
      this.toast(this.vm.lastError ?? "focus request failed");
    }
    if (outcome === "committed" && this.vm.document) {
      this.loadImages(this.vm.document);
    }
    this.scheduleDraw();
  }

  private onHover(ev: MouseEvent): void {
    const id = this.pick(ev);
    if (id !== this.hoverId) {
      this.hoverId = id;
      const doc = this.vm?.document;
      const item = doc?.items.find((entry) => entry.id === id);
      el<HTMLDivElement>("status").textContent = item
        ? `${item.id}  level ${item.level}  parent ${item.parent}`
        : "";
      this.scheduleDraw();
    }
  }

  private pick(ev: MouseEvent): string | null {
    const bounds = this.canvas.getBoundingClientRect();
    const doc = this.vm?.document;
    if (!doc) return null;
    const [x0, y0] = doc.shape.bbox;
    const x = x0 + (ev.clientX - bounds.left) * (this.canvas.width / bounds.width);
    const y = y0 + (ev.clientY - bounds.top) * (this.canvas.height / bounds.height);
    return hitTest(this.drawn, x, y);
  }

  private scheduleDraw(): void {
    if (this.rafPending) return;
    this.rafPending = true;
    requestAnimationFrame(() => {
      this.rafPending = false;
      this.draw();
    });
  }

  private draw(): void {
    const vm = this.vm;
    if (!vm || !vm.document) return;
    const now = performance.now();
    const doc = vm.document;
    const [x0, y0] = doc.shape.bbox;
    this.ctx.setTransform(1, 0, 0, 1, -x0, -y0);
    this.ctx.clearRect(x0, y0, this.canvas.width, this.canvas.height);
    this.drawn = drawScene(this.ctx, doc, vm.rectsAt(now), {
      hoverId: this.hoverId,
      selectedId: vm.selectedId,
      images: this.images,
    });
    if (!vm.settled(now)) this.scheduleDraw();
  }
}

new ViewerApp();
