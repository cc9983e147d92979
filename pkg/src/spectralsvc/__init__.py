"""Support vector clustering accelerated by spectral data compression."""

from .compression import (
    CompositeMap,
    CompressionMap,
    CompressionParams,
    CompressionResult,
    aggregate_once,
    build_pseudo_samples,
    compress,
    lift_labels,
)
from .data import DataSet, generate_blobs, generate_rings, load_dense_matrix, standardize
from .embedding import (
    Embedding,
    embed_eigenvectors,
    embed_smoothed,
    spectral_similarity,
)
from .graph import Graph, build_knn_graph, connected_components, laplacian
from .labeling import AdjacencyParams, adjacent, label_complete_graph, label_proximity_graph
from .metrics import contingency, nmi
from .pipeline import PipelineConfig, compare_methods, run_on_dataset, run_pipeline, sweep_compression
from .sep import DescentOptions, SepSet, descend, find_seps, sep_svc
from .svdd import (
    KernelParams,
    SvddModel,
    point_role,
    radius2,
    radius2_gradient,
    suggest_q,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AdjacencyParams",
    "CompositeMap",
    "CompressionMap",
    "CompressionParams",
    "CompressionResult",
    "DataSet",
    "DescentOptions",
    "Embedding",
    "Graph",
    "KernelParams",
    "PipelineConfig",
    "SepSet",
    "SvddModel",
    "adjacent",
    "aggregate_once",
    "build_knn_graph",
    "build_pseudo_samples",
    "compare_methods",
    "compress",
    "connected_components",
    "contingency",
    "descend",
    "embed_eigenvectors",
    "embed_smoothed",
    "find_seps",
    "generate_blobs",
    "generate_rings",
    "label_complete_graph",
    "label_proximity_graph",
    "laplacian",
    "lift_labels",
    "load_dense_matrix",
    "nmi",
    "point_role",
    "radius2",
    "radius2_gradient",
    "run_on_dataset",
    "run_pipeline",
    "sep_svc",
    "spectral_similarity",
    "standardize",
    "suggest_q",
    "sweep_compression",
    "train",
]
