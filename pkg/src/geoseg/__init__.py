"""Topology-aware segmentation toolkit.

Geodesic reconstruction preprocessing injects global connectivity
information into purely local segmentation; the package bundles the
morphological operators, the soft-Jaccard loss, tiling, post-processing,
evaluation metrics, a synthetic phantom generator, a bounded-receptive-
field reference classifier, and a batch CLI.
"""

__version__ = "0.1.0"

from .raster import (
    DimensionError,
    IntensityRaster,
    LabelMap,
    ProbabilityMap,
    argmax_labels,
    crop,
    pointwise_min,
)
from .morphology import RECONSTRUCTION_ALGORITHMS, dilate_cross, reconstruct
from .preprocess import PreprocessConfig, build_border_marker, geodesic_preprocess
from .tiling import Crop, CropSpec, grid_crops, pad_to_multiple, unpad
from .loss import LossConfig, jaccard_loss, jaccard_loss_grad, multichannel_loss
from .metrics import EvalReport, accuracy, class_jaccard, evaluate, mean_contour_distance
from .postprocess import Component, DegenerateMapError, connected_components, enforce_topology
from .phantom import PhantomPair, PhantomSpec, generate_phantom
from .classifier import (
    LocalWindowClassifier,
    extract_features,
    load_model,
    predict,
    save_model,
    segment,
    train,
)

__all__ = [
    "__version__",
    "DimensionError",
    "IntensityRaster",
    "LabelMap",
    "ProbabilityMap",
    "argmax_labels",
    "crop",
    "pointwise_min",
    "RECONSTRUCTION_ALGORITHMS",
    "dilate_cross",
    "reconstruct",
    "PreprocessConfig",
    "build_border_marker",
    "geodesic_preprocess",
    "Crop",
    "CropSpec",
    "grid_crops",
    "pad_to_multiple",
    "unpad",
    "LossConfig",
    "jaccard_loss",
    "jaccard_loss_grad",
    "multichannel_loss",
    "EvalReport",
    "accuracy",
    "class_jaccard",
    "evaluate",
    "mean_contour_distance",
    "Component",
    "DegenerateMapError",
    "connected_components",
    "enforce_topology",
    "PhantomPair",
    "PhantomSpec",
    "generate_phantom",
    "LocalWindowClassifier",
    "extract_features",
    "load_model",
    "predict",
    "save_model",
    "segment",
    "train",
]
