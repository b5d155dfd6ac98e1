"""Fraud-ring detection on account graphs.

A toolkit for semi-supervised detection of linked fraudulent accounts:
a sparse spectral graph convolution classifier trained on a handful of
labelled nodes, plus label-propagation community detection and a
feature-only classifier for comparison, with deterministic synthetic
dataset generators and a benchmark harness.
"""

__version__ = "0.1.0"

from .graph import Graph, NormalizedAdjacency, build_graph, normalize, spmm, to_dot
from .labeling import CommunityAssignment, LabelAssignment
from .gcn import GcnModel, TrainConfig, forward, init_model, predict, train
from .baselines import LpConfig, label_propagation
from .datasets import GenSpec, Dataset, generate_binary, generate_multi
from .evaluate import Metrics, precision_recall, run_experiment

__all__ = [
    "__version__",
    "Graph",
    "NormalizedAdjacency",
    "build_graph",
    "normalize",
    "spmm",
    "to_dot",
    "LabelAssignment",
    "CommunityAssignment",
    "GcnModel",
    "TrainConfig",
    "init_model",
    "forward",
    "train",
    "predict",
    "LpConfig",
    "label_propagation",
    "GenSpec",
    "Dataset",
    "generate_binary",
    "generate_multi",
    "Metrics",
    "precision_recall",
    "run_experiment",
]
