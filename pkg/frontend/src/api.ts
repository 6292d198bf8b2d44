// Thin fetch client for the layout service. The viewer never mutates layout
// data itself; everything observable comes back as a LayoutDocument.

import { CreateCollectionResponse, LayoutDocument, parseLayoutDocument } from "./types.js";

export interface FocusApi {
  focus(imageId: string): Promise<LayoutDocument>;
}

export class LayoutClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async createCollection(manifestJson: string): Promise<CreateCollectionResponse> {
    const resp = await fetch(this.url("/api/collections"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: manifestJson,
    });
    if (!resp.ok) {
      throw new Error(`create failed (${resp.status}): ${await resp.text()}`);
    }
    return (await resp.json()) as CreateCollectionResponse;
  }

  async getLayout(collectionId: string): Promise<LayoutDocument> {
    const resp = await fetch(this.url(`/api/collections/${collectionId}/layout`));
    if (!resp.ok) {
      throw new Error(`layout fetch failed (${resp.status}): ${await resp.text()}`);
    }
    return parseLayoutDocument(await resp.json());
  }

  imageUrl(collectionId: string, imageId: string): string {
    return this.url(`/api/collections/${collectionId}/images/${imageId}`);
  }

  session(collectionId: string): FocusApi {
    return {
      focus: async (imageId: string) => {
        const resp = await fetch(this.url(`/api/collections/${collectionId}/focus`), {
          method: "POST",
          headers: { "content-type": "application/json" },
          body: JSON.stringify({ image_id: imageId }),
        });
        if (!resp.ok) {
          throw new Error(`focus failed (${resp.status}): ${await resp.text()}`);
        }
        return parseLayoutDocument(await resp.json());
      },
    };
  }
}
