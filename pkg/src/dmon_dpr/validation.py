"""Input checks shared by the estimator and the CLI."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .graph import GraphError, SparseGraph, build_graph, graph_from_scipy


def check_graph(graph, n_nodes: int | None = None) -> SparseGraph:
    """Coerce ``graph`` to a :class:`SparseGraph`.

    Accepts a :class:`SparseGraph`, a scipy sparse or dense square adjacency,
    or an ``(E, 2)`` integer edge array (then ``n_nodes`` is required).
    """
    if graph is None:
        raise GraphError("a graph is required")
    if isinstance(graph, SparseGraph):
        g = graph
    elif sp.issparse(graph):
        g = graph_from_scipy(graph)
    else:
        arr = np.asarray(graph)
        if arr.ndim == 2 and arr.shape[0] == arr.shape[1] and arr.shape[1] != 2:
            g = graph_from_scipy(arr)
        elif arr.ndim == 2 and arr.shape[1] == 2 and np.issubdtype(arr.dtype, np.integer):
            if n_nodes is None:
                raise GraphError("an edge array needs the node count")
            g = build_graph(arr, n_nodes)
        else:
            raise GraphError(f"cannot interpret object of shape {arr.shape} as a graph")
    if n_nodes is not None and g.n != n_nodes:
        raise GraphError(f"graph has {g.n} nodes but X has {n_nodes} rows")
    return g


def check_assignment(C, atol: float = 1e-9) -> np.ndarray:
    """Validate a row-stochastic soft assignment matrix."""
    C = np.asarray(C, dtype=np.float64)
    if C.ndim != 2:
        raise ValueError(f"assignment matrix must be 2-D, got shape {C.shape}")
    if not np.isfinite(C).all() or (C < 0).any() or (C > 1).any():
        raise ValueError("assignment entries must be finite and within [0, 1]")
    if not np.allclose(C.sum(axis=1), 1.0, rtol=0.0, atol=atol):
        raise ValueError("assignment rows must sum to 1")
    return C
