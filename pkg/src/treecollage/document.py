"""The layout document: the self-contained result record.

One JSON document carries the final rectangle per image, the tree structure
(parent and level per item), a shape echo, the objective summary, and the
configuration used. Serialization is canonical (sorted keys) so identical
runs produce byte-identical files.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from .costs import CostParams
from .geometry import ShapeRegion
from .manifest import Manifest
from .optimizer import PipelineResult, TuningParams

DOCUMENT_VERSION = 1


class DocumentError(ValueError):
    """A layout document failed validation."""


@dataclass(frozen=True)
class LayoutItem:
    id: str
    x: float
    y: float
    w: float
    h: float
    level: int
    parent: str
    path: str | None = None


@dataclass(frozen=True)
class LayoutDocument:
    version: int
    generator: str
    items: tuple[LayoutItem, ...]
    shape: dict
    objective: dict
    config: dict


def _config_echo(params: CostParams, tuning: TuningParams, seed: int | None) -> dict:
    cfg = {
        "params": asdict(params),
        "tuning": {
            key: (list(value) if isinstance(value, tuple) else value)
            for key, value in asdict(tuning).items()
        },
    }
    if seed is not None:
        cfg["seed"] = seed
    return cfg


def build_document(
    result: PipelineResult,
    shape: ShapeRegion,
    params: CostParams,
    tuning: TuningParams,
    seed: int | None = None,
    manifest: Manifest | None = None,
    generator: str | None = None,
) -> LayoutDocument:
    """Assemble the document for a finished pipeline run."""
    from . import __version__

    paths = {}
    if manifest is not None:
        paths = {item.id: item.pixel_source for item in manifest.items}
    layout = result.layout
    tree = result.tree
    items = []
    for node_id in tree.order:
        i = layout.index[node_id]
        items.append(
            LayoutItem(
                id=node_id,
                x=float(layout.x[i]),
                y=float(layout.y[i]),
                w=float(layout.w[i]),
                h=float(layout.h[i]),
                level=tree.levels[node_id],
                parent=tree.parents[node_id],
                path=paths.get(node_id),
            )
        )
    shape_echo = {"bbox": list(shape.bbox), "cell": shape.cell}
    shape_echo.update(shape.source)
    return LayoutDocument(
        version=DOCUMENT_VERSION,
        generator=generator or f"treecollage {__version__}",
        items=tuple(items),
        shape=shape_echo,
        objective=result.trace.summary(),
        config=_config_echo(params, tuning, seed),
    )


def document_to_bytes(doc: LayoutDocument) -> bytes:
    payload = {
        "version": doc.version,
        "generator": doc.generator,
        "items": [asdict(item) for item in doc.items],
        "shape": doc.shape,
        "objective": doc.objective,
        "config": doc.config,
    }
    return (json.dumps(payload, sort_keys=True, indent=2) + "\n").encode("utf-8")


def document_from_bytes(data: bytes | str) -> LayoutDocument:
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"layout document is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("version") != DOCUMENT_VERSION:
        raise DocumentError(f"unsupported layout document version: {payload.get('version')!r}")
    try:
        items = tuple(
            LayoutItem(
                id=raw["id"],
                x=float(raw["x"]),
                y=float(raw["y"]),
                w=float(raw["w"]),
                h=float(raw["h"]),
                level=int(raw["level"]),
                parent=raw["parent"],
                path=raw.get("path"),
            )
            for raw in payload["items"]
        )
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"layout document items are malformed: {exc}") from exc
    doc = LayoutDocument(
        version=payload["version"],
        generator=payload.get("generator", ""),
        items=items,
        shape=payload.get("shape", {}),
        objective=payload.get("objective", {}),
        config=payload.get("config", {}),
    )
    validate_document(doc)
    return doc


def validate_document(doc: LayoutDocument) -> None:
    """Structural checks: unique ids, one root, consistent parent levels."""
    ids = [item.id for item in doc.items]
    if len(set(ids)) != len(ids):
        raise DocumentError("duplicate item ids in layout document")
    by_id = {item.id: item for item in doc.items}
    roots = [item for item in doc.items if item.parent == item.id]
    if len(roots) != 1 or roots[0].level != 0:
        raise DocumentError("layout document must have exactly one root at level 0")
    for item in doc.items:
        if item.w <= 0 or item.h <= 0:
            raise DocumentError(f"item {item.id!r} has non-positive size")
        if item.parent not in by_id:
            raise DocumentError(f"item {item.id!r} has unknown parent {item.parent!r}")
        if item.parent != item.id and item.level != by_id[item.parent].level + 1:
            raise DocumentError(f"item {item.id!r} level does not match its parent")
