"""Manifest parsing and target-shape loading.

A manifest is a versioned JSON document carrying the property schema, the
items with their property values, the target shape (grayscale mask path or
polygon), and optional parameter overrides. Validation errors always name the
offending item and field.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .costs import CostParams
from .geometry import DEFAULT_RASTER_RESOLUTION, ShapeRegion
from .model import (
    SEMANTIC,
    VISUAL,
    Descriptor,
    Histogram,
    ImageItem,
    PropertySchema,
    Tag,
)
from .optimizer import TuningParams

MANIFEST_VERSION = 1
HISTOGRAM_RENORM_TOL = 1e-6

PARAM_KEYS = (
    "w_corr", "w_level", "w_size", "w_overlap", "w_shape",
    "curvature", "max_overlap", "level_iters", "outside_pass_iters", "rel_tol",
)
TUNING_KEYS = (
    "tune_range", "grid_step", "scale_steps", "aspect_steps",
    "max_outside_iters", "max_scaling_iters",
)


class ManifestError(ValueError):
    """A manifest failed validation; the message names the offending field."""


@dataclass(frozen=True)
class ShapeSpec:
    """Where the target shape comes from: a mask file or an inline polygon."""

    mask_path: str | None = None
    polygon: tuple[tuple[float, float], ...] | None = None
    resolution: int = DEFAULT_RASTER_RESOLUTION

    def __post_init__(self) -> None:
        if (self.mask_path is None) == (self.polygon is None):
            raise ManifestError("shape must define exactly one of 'mask' or 'polygon'")


@dataclass(frozen=True)
class Manifest:
    version: int
    schema: PropertySchema
    items: tuple[ImageItem, ...]
    shape: ShapeSpec
    params: CostParams
    tuning: TuningParams
    seed: int | None = None


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ManifestError(message)


def _parse_schema(raw) -> PropertySchema:
    _require(isinstance(raw, list) and len(raw) > 0, "schema must be a non-empty list")
    descriptors = []
    for k, entry in enumerate(raw):
        _require(isinstance(entry, dict), f"schema[{k}] must be an object")
        _require("name" in entry, f"schema[{k}] missing 'name'")
        _require("kind" in entry, f"schema entry {entry.get('name')!r} missing 'kind'")
        kind = entry["kind"]
        _require(kind in (VISUAL, SEMANTIC),
                 f"schema entry {entry['name']!r}: kind must be visual or semantic")
        threshold = entry.get("threshold", 0.5)
        _require(isinstance(threshold, (int, float)) and 0.0 <= threshold <= 1.0,
                 f"schema entry {entry['name']!r}: threshold must be in [0, 1]")
        descriptors.append(Descriptor(str(entry["name"]), kind, float(threshold)))
    try:
        return PropertySchema(tuple(descriptors))
    except ValueError as exc:
        raise ManifestError(f"schema: {exc}") from exc


def _parse_histogram(item_id: str, name: str, raw) -> Histogram:
    _require(isinstance(raw, list) and len(raw) > 0,
             f"item {item_id!r} property {name!r}: histogram must be a non-empty list")
    values = []
    for v in raw:
        _require(isinstance(v, (int, float)),
                 f"item {item_id!r} property {name!r}: histogram bins must be numbers")
        _require(v >= 0, f"item {item_id!r} property {name!r}: histogram bins must be >= 0")
        values.append(float(v))
    total = math.fsum(values)
    _require(abs(total - 1.0) <= HISTOGRAM_RENORM_TOL,
             f"item {item_id!r} property {name!r}: histogram sums to {total!r}, not 1")
    return Histogram.normalized(values)


def _parse_item(raw, schema: PropertySchema, base_dir: Path | None) -> ImageItem:
    _require(isinstance(raw, dict), "items entries must be objects")
    _require("id" in raw, "item missing 'id'")
    item_id = str(raw["id"])
    for key in ("width", "height"):
        _require(key in raw, f"item {item_id!r} missing '{key}'")
        _require(isinstance(raw[key], int) and raw[key] > 0,
                 f"item {item_id!r}: '{key}' must be a positive integer")
    props_raw = raw.get("properties")
    _require(isinstance(props_raw, dict), f"item {item_id!r} missing 'properties'")
    values = []
    for desc in schema.descriptors:
        _require(desc.name in props_raw,
                 f"item {item_id!r} missing property {desc.name!r}")
        value = props_raw[desc.name]
        if desc.kind == SEMANTIC:
            _require(isinstance(value, str),
                     f"item {item_id!r} property {desc.name!r}: semantic value must be a string")
            values.append(Tag(value))
        else:
            values.append(_parse_histogram(item_id, desc.name, value))
    extra = set(props_raw) - {d.name for d in schema.descriptors}
    _require(not extra,
             f"item {item_id!r} has properties not in the schema: {sorted(extra)}")
    path = raw.get("path")
    if path is not None:
        _require(isinstance(path, str), f"item {item_id!r}: 'path' must be a string")
        resolved = (base_dir / path) if base_dir is not None else Path(path)
        _require(resolved.exists(), f"item {item_id!r}: image file not found: {resolved}")
    return ImageItem(
        id=item_id,
        native_width=raw["width"],
        native_height=raw["height"],
        properties=tuple(values),
        pixel_source=path,
    )


def _parse_shape(raw, base_dir: Path | None) -> ShapeSpec:
    _require(isinstance(raw, dict), "shape must be an object")
    if "mask" in raw:
        _require("polygon" not in raw, "shape: give 'mask' or 'polygon', not both")
        path = raw["mask"]
        _require(isinstance(path, str), "shape: 'mask' must be a path string")
        resolved = (base_dir / path) if base_dir is not None else Path(path)
        _require(resolved.exists(), f"shape: mask file not found: {resolved}")
        return ShapeSpec(mask_path=path)
    _require("polygon" in raw, "shape must define 'mask' or 'polygon'")
    points_raw = raw["polygon"]
    _require(isinstance(points_raw, list) and len(points_raw) >= 3,
             "shape: polygon needs at least 3 [x, y] vertices")
    points = []
    for k, pt in enumerate(points_raw):
        _require(isinstance(pt, list) and len(pt) == 2
                 and all(isinstance(c, (int, float)) for c in pt),
                 f"shape: polygon[{k}] must be [x, y]")
        points.append((float(pt[0]), float(pt[1])))
    resolution = raw.get("resolution", DEFAULT_RASTER_RESOLUTION)
    _require(isinstance(resolution, int) and resolution >= 16,
             "shape: resolution must be an integer >= 16")
    return ShapeSpec(polygon=tuple(points), resolution=resolution)


def parse_params(raw) -> CostParams:
    _require(isinstance(raw, dict), "params must be an object")
    unknown = set(raw) - set(PARAM_KEYS)
    _require(not unknown, f"params has unknown keys: {sorted(unknown)}")
    try:
        return CostParams(**raw)
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"params: {exc}") from exc


def parse_tuning(raw) -> TuningParams:
    _require(isinstance(raw, dict), "tuning must be an object")
    unknown = set(raw) - set(TUNING_KEYS)
    _require(not unknown, f"tuning has unknown keys: {sorted(unknown)}")
    kwargs = dict(raw)
    for key in ("scale_steps", "aspect_steps"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    try:
        return TuningParams(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"tuning: {exc}") from exc


def parse_manifest(data: bytes | str, base_dir: Path | str | None = None) -> Manifest:
    """Parse and validate manifest bytes.

    Histograms whose mass is within 1e-6 of 1 are renormalized; anything
    further off is rejected. Referenced files are resolved against
    ``base_dir`` and must exist.
    """
    base = Path(base_dir) if base_dir is not None else None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "manifest root must be an object")
    version = doc.get("version")
    _require(version == MANIFEST_VERSION,
             f"manifest version must be {MANIFEST_VERSION}, got {version!r}")
    schema = _parse_schema(doc.get("schema"))
    _require(isinstance(doc.get("items"), list) and len(doc["items"]) > 0,
             "manifest needs a non-empty 'items' list")
    items = tuple(_parse_item(raw, schema, base) for raw in doc["items"])
    ids = [item.id for item in items]
    _require(len(set(ids)) == len(ids), "item ids must be unique")
    for f, desc in enumerate(schema.descriptors):
        if desc.kind == VISUAL:
            lengths = {len(item.properties[f].bins) for item in items}  # type: ignore[union-attr]
            _require(len(lengths) == 1,
                     f"property {desc.name!r}: histogram bin counts differ across items")
    shape = _parse_shape(doc.get("shape"), base)
    params = parse_params(doc.get("params", {}))
    tuning = parse_tuning(doc.get("tuning", {}))
    seed = doc.get("seed")
    _require(seed is None or isinstance(seed, int), "seed must be an integer")
    return Manifest(
        version=version,
        schema=schema,
        items=items,
        shape=shape,
        params=params,
        tuning=tuning,
        seed=seed,
    )


def load_shape(spec: ShapeSpec, base_dir: Path | str | None = None) -> ShapeRegion:
    """Materialize a ShapeSpec into a raster region."""
    if spec.mask_path is not None:
        base = Path(base_dir) if base_dir is not None else Path(".")
        return ShapeRegion.from_mask_image(base / spec.mask_path)
    assert spec.polygon is not None
    return ShapeRegion.from_polygon(spec.polygon, resolution=spec.resolution)


def parse_run_config(data: bytes | str) -> dict:
    """Parse a run-config file: optional 'params', 'tuning', and 'seed' keys
    that override the manifest's values."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"config is not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "config root must be an object")
    unknown = set(doc) - {"params", "tuning", "seed"}
    _require(not unknown, f"config has unknown keys: {sorted(unknown)}")
    out: dict = {}
    if "params" in doc:
        out["params"] = parse_params(doc["params"])
    if "tuning" in doc:
        out["tuning"] = parse_tuning(doc["tuning"])
    if "seed" in doc:
        _require(isinstance(doc["seed"], int), "config seed must be an integer")
        out["seed"] = doc["seed"]
    return out
