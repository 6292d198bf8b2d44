"""Tree-structured image collection layout engine."""

__version__ = "0.1.0"

from .costs import CostParams, LayoutState
from .geometry import Rect, ShapeRegion
from .hyperbolic import InitialLayout, project
from .manifest import Manifest, ManifestError, load_shape, parse_manifest
from .model import (
    Descriptor,
    Histogram,
    ImageItem,
    PropertySchema,
    Tag,
    extract_color_histogram,
    histogram_intersection,
)
from .optimizer import (
    LayoutInfeasibleError,
    OptimizationTrace,
    PipelineResult,
    TuningParams,
    run_pipeline,
)
from .tree import ImageTree, build_tree, is_unbalanced, order_collection, select_root, transfer_tree

__all__ = [
    "__version__",
    "CostParams",
    "LayoutState",
    "Rect",
    "ShapeRegion",
    "InitialLayout",
    "project",
    "Manifest",
    "ManifestError",
    "load_shape",
    "parse_manifest",
    "Descriptor",
    "Histogram",
    "ImageItem",
    "PropertySchema",
    "Tag",
    "extract_color_histogram",
    "histogram_intersection",
    "LayoutInfeasibleError",
    "OptimizationTrace",
    "PipelineResult",
    "TuningParams",
    "run_pipeline",
    "ImageTree",
    "build_tree",
    "is_unbalanced",
    "order_collection",
    "select_root",
    "transfer_tree",
]
