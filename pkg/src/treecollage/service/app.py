"""HTTP facade over the layout pipeline.

Routes:
  POST /api/collections                      create a collection from manifest bytes
  GET  /api/collections/{id}/layout          latest layout document
  POST /api/collections/{id}/focus           re-layout around a focus image
  GET  /api/collections/{id}/images/{image}  raster bytes when the item has a file

Layout responses are the exact document bytes the CLI writes. Pipeline work
runs in the threadpool; mutations on one session are serialized by its lock
while reads return the latest committed revision without blocking.
"""
from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.concurrency import run_in_threadpool
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse

from ..document import build_document, document_to_bytes
from ..manifest import Manifest, ManifestError, load_shape, parse_manifest
from ..optimizer import LayoutInfeasibleError, run_pipeline
from .schemas import CreateCollectionResponse, FocusRequest
from .sessions import CollectionSession, SessionStore


def _compute_layout(manifest: Manifest, base_dir, focus_id: str | None = None):
    shape = load_shape(manifest.shape, base_dir)
    result = run_pipeline(
        manifest.items, manifest.schema, shape,
        params=manifest.params, tuning=manifest.tuning, focus_id=focus_id,
    )
    doc = build_document(
        result, shape, manifest.params, manifest.tuning,
        seed=manifest.seed, manifest=manifest,
    )
    return result, document_to_bytes(doc)


def create_app(data_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="treecollage layout service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(data_dir=data_dir)
    app.state.store = store
    base_dir = Path(data_dir) if data_dir is not None else Path(".")

    def _session_or_404(collection_id: str) -> CollectionSession:
        session = store.get(collection_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown collection {collection_id!r}")
        return session

    @app.post("/api/collections", status_code=201, response_model=CreateCollectionResponse)
    async def create_collection(request: Request):
        manifest_bytes = await request.body()
        try:
            manifest = parse_manifest(manifest_bytes, base_dir=base_dir)
            result, layout_bytes = await run_in_threadpool(_compute_layout, manifest, base_dir)
        except ManifestError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except LayoutInfeasibleError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        session = store.create(manifest, result.tree.root_id, layout_bytes, manifest_bytes)
        return CreateCollectionResponse(
            id=session.id, revision=session.revision, item_count=len(manifest.items)
        )

    @app.get("/api/collections/{collection_id}/layout")
    def get_layout(collection_id: str) -> Response:
        session = _session_or_404(collection_id)
        return Response(content=session.layout_bytes, media_type="application/json")

    @app.post("/api/collections/{collection_id}/focus")
    async def focus(collection_id: str, request: FocusRequest) -> Response:
        session = _session_or_404(collection_id)
        if all(item.id != request.image_id for item in session.manifest.items):
            raise HTTPException(
                status_code=404, detail=f"unknown image {request.image_id!r}"
            )

        def recompute() -> tuple[int, bytes]:
            with session.lock:
                _, layout_bytes = _compute_layout(
                    session.manifest, base_dir, focus_id=request.image_id
                )
                return store.commit(session, layout_bytes), layout_bytes

        try:
            revision, layout_bytes = await run_in_threadpool(recompute)
        except LayoutInfeasibleError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return Response(
            content=layout_bytes,
            media_type="application/json",
            headers={"X-Layout-Revision": str(revision)},
        )

    @app.get("/api/collections/{collection_id}/images/{image_id}")
    def get_image(collection_id: str, image_id: str):
        session = _session_or_404(collection_id)
        for item in session.manifest.items:
            if item.id == image_id:
                if item.pixel_source is None:
                    raise HTTPException(status_code=404, detail="item has no image file")
                path = base_dir / item.pixel_source
                if not path.exists():
                    raise HTTPException(status_code=404, detail="image file missing")
                return FileResponse(path)
        raise HTTPException(status_code=404, detail=f"unknown image {image_id!r}")

    return app
