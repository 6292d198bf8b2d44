"""Command-line interface: thin client over the layout pipeline and service.

Exit codes: 0 on success, 2 on validation errors, 3 when overlap resolution
is infeasible.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .document import build_document, document_to_bytes
from .manifest import Manifest, ManifestError, load_shape, parse_manifest, parse_run_config
from .optimizer import LayoutInfeasibleError, run_pipeline
from .svg import render_svg

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--manifest", required=True, help="path to the manifest JSON")
    parser.add_argument("--shape", help="override the manifest shape with a mask image")
    parser.add_argument("--config", help="run-config JSON overriding params/tuning/seed")
    parser.add_argument("--seed", type=int, help="seed echoed into the layout document")
    parser.add_argument("--out", help="write the layout document here (default: stdout)")
    parser.add_argument("--svg", help="also render an SVG preview to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treecollage",
        description="Organize an image collection into a shaped, overlap-free layout.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_layout = sub.add_parser("layout", help="compute a layout from a manifest")
    _add_common(p_layout)
    p_layout.add_argument("--focus-id", help="optional focus image for a re-rooted layout")

    p_focus = sub.add_parser("focus", help="re-layout around a focus image")
    _add_common(p_focus)
    p_focus.add_argument("--focus-id", required=True, help="focus image id")

    p_validate = sub.add_parser("validate", help="lint a manifest")
    p_validate.add_argument("--manifest", required=True)

    p_trace = sub.add_parser("trace", help="run the pipeline and dump objective curves")
    p_trace.add_argument("--manifest", required=True)
    p_trace.add_argument("--shape", help="override the manifest shape with a mask image")
    p_trace.add_argument("--config", help="run-config JSON overriding params/tuning/seed")
    p_trace.add_argument("--seed", type=int)
    p_trace.add_argument("--out", help="write the trace JSON here (default: stdout)")
    p_trace.add_argument("--focus-id", help="optional focus image")

    p_serve = sub.add_parser("serve", help="start the HTTP layout service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--data-dir", help="persist manifests and layouts here")
    return parser


def _load_manifest(args) -> tuple[Manifest, Path]:
    path = Path(args.manifest)
    manifest = parse_manifest(path.read_bytes(), base_dir=path.parent)
    return manifest, path.parent


def _resolve_inputs(args):
    manifest, base_dir = _load_manifest(args)
    params = manifest.params
    tuning = manifest.tuning
    seed = manifest.seed
    if getattr(args, "config", None):
        overrides = parse_run_config(Path(args.config).read_bytes())
        params = overrides.get("params", params)
        tuning = overrides.get("tuning", tuning)
        seed = overrides.get("seed", seed)
    if getattr(args, "seed", None) is not None:
        seed = args.seed
    if getattr(args, "shape", None):
        from .geometry import ShapeRegion

        shape = ShapeRegion.from_mask_image(args.shape)
    else:
        shape = load_shape(manifest.shape, base_dir)
    return manifest, shape, params, tuning, seed


def _emit(data: bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))


def _run_and_document(args, focus_id: str | None):
    manifest, shape, params, tuning, seed = _resolve_inputs(args)
    if focus_id is not None and all(item.id != focus_id for item in manifest.items):
        raise ManifestError(f"focus id {focus_id!r} is not in the collection")
    result = run_pipeline(
        manifest.items, manifest.schema, shape,
        params=params, tuning=tuning, focus_id=focus_id,
    )
    doc = build_document(result, shape, params, tuning, seed=seed, manifest=manifest)
    return result, doc, shape


def _cmd_layout(args) -> int:
    result, doc, shape = _run_and_document(args, getattr(args, "focus_id", None))
    payload = document_to_bytes(doc)
    _emit(payload, args.out)
    if args.out:
        trace_path = Path(args.out).with_suffix(".trace.json")
        trace_path.write_text(
            json.dumps(result.trace.summary(), sort_keys=True, indent=2) + "\n"
        )
    if args.svg:
        Path(args.svg).write_bytes(render_svg(doc, shape))
    return EXIT_OK


def _cmd_validate(args) -> int:
    path = Path(args.manifest)
    manifest = parse_manifest(path.read_bytes(), base_dir=path.parent)
    print(f"OK: {len(manifest.items)} items, "
          f"{manifest.schema.property_count} properties")
    return EXIT_OK


def _cmd_trace(args) -> int:
    manifest, shape, params, tuning, _ = _resolve_inputs(args)
    focus = getattr(args, "focus_id", None)
    result = run_pipeline(
        manifest.items, manifest.schema, shape,
        params=params, tuning=tuning, focus_id=focus,
    )
    full = {
        "levels": [
            {"level": t.level, "phase": t.phase, "objectives": t.objectives}
            for t in result.trace.level_traces
        ],
        "summary": result.trace.summary(),
    }
    _emit((json.dumps(full, sort_keys=True, indent=2) + "\n").encode(), args.out)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "layout":
            return _cmd_layout(args)
        if args.command == "focus":
            return _cmd_layout(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "trace":
            return _cmd_trace(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except (ManifestError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except LayoutInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
