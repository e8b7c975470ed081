"""Deep modularity graph clustering with diversity-preserving regularizers."""
from .data_io import Dataset, SbmSpec, generate_sbm, load_dataset, save_dataset
from .encoder import ModelParams, forward, init_params
from .estimator import DMoNDPR
from .graph import NormalizedAdjacency, SparseGraph, build_graph, normalize_adjacency, spmm
from .objective import LossBreakdown, LossConfig, total_loss
from .trainer import TrainConfig, TrainHistory, train

__all__ = [
    "DMoNDPR", "Dataset", "LossBreakdown", "LossConfig", "ModelParams", "NormalizedAdjacency",
    "SbmSpec", "SparseGraph", "TrainConfig", "TrainHistory", "build_graph", "forward",
    "generate_sbm", "init_params", "load_dataset", "normalize_adjacency", "save_dataset",
    "spmm", "total_loss", "train",
]
__version__ = "0.1.0"
