"""Sparse undirected graphs and the adjacency algebra used by the model.

The modularity matrix ``B = A - d d^T / 2m`` is never formed; callers use
the degree vector together with sparse products against ``A``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.sparse as sp


class GraphError(ValueError):
    """Raised for malformed graph input."""


@dataclass(frozen=True, eq=False)
class SparseGraph:
    """Unweighted undirected graph stored as a symmetric CSR pattern.

    Attributes
    ----------
    n : int
        Number of nodes.
    row_offsets, col_indices : ndarray of int64
        CSR structure; every undirected edge is stored in both directions.
    degrees : ndarray of float64
        Number of stored neighbours per node.
    m : int
        Number of undirected edges, so ``degrees.sum() == 2 * m``.
    """

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    degrees: np.ndarray
    m: int
    _csr: sp.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        data = np.ones(len(self.col_indices), dtype=np.float64)
        csr = sp.csr_matrix((data, self.col_indices, self.row_offsets), shape=(self.n, self.n))
        object.__setattr__(self, "_csr", csr)

    @property
    def adjacency(self) -> sp.csr_matrix:
        """The 0/1 adjacency matrix as a scipy CSR matrix (read-only by convention)."""
        return self._csr

    def edges(self) -> np.ndarray:
        """Unique undirected edges as an (m, 2) array with ``u < v``."""
        rows = np.repeat(np.arange(self.n), np.diff(self.row_offsets))
        keep = rows < self.col_indices
        return np.column_stack([rows[keep], self.col_indices[keep]])

    def neighbors(self, v: int) -> np.ndarray:
        return self.col_indices[self.row_offsets[v]:self.row_offsets[v + 1]]

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()


@dataclass(frozen=True, eq=False)
class NormalizedAdjacency:
    """Symmetrically normalized adjacency ``D^{-1/2} A D^{-1/2}`` in CSR form."""

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray
    _csr: sp.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        csr = sp.csr_matrix((self.values, self.col_indices, self.row_offsets), shape=(self.n, self.n))
        object.__setattr__(self, "_csr", csr)

    @property
    def matrix(self) -> sp.csr_matrix:
        return self._csr

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()


def build_graph(edges: Iterable[tuple[int, int]] | np.ndarray, n: int) -> SparseGraph:
    """Build a :class:`SparseGraph` from an edge list.

    Both orientations and repeated pairs collapse into a single undirected
    edge. Self-loops and out-of-range ids raise :class:`GraphError`.
    """
    n = int(n)
    if n < 0:
        raise GraphError(f"node count must be non-negative, got {n}")
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GraphError(f"edge list must have shape (E, 2), got {arr.shape}")

    bad = (arr < 0) | (arr >= n)
    if bad.any():
        i = int(np.flatnonzero(bad.any(axis=1))[0])
        raise GraphError(f"edge {i} ({arr[i, 0]}, {arr[i, 1]}) has a node id outside [0, {n})")
    loops = arr[:, 0] == arr[:, 1]
    if loops.any():
        i = int(np.flatnonzero(loops)[0])
        raise GraphError(f"edge {i} is a self-loop on node {arr[i, 0]}")

    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    und = np.unique(np.column_stack([lo, hi]), axis=0) if len(lo) else np.empty((0, 2), np.int64)
    m = len(und)

    rows = np.concatenate([und[:, 0], und[:, 1]])
    cols = np.concatenate([und[:, 1], und[:, 0]])
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    counts = np.bincount(rows, minlength=n)
    row_offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=row_offsets[1:])
    return SparseGraph(
        n=n,
        row_offsets=row_offsets,
        col_indices=cols.astype(np.int64),
        degrees=counts.astype(np.float64),
        m=m,
    )


def graph_from_scipy(adj) -> SparseGraph:
    """Convert any scipy sparse / dense 0-1 adjacency into a :class:`SparseGraph`.

    A nonzero entry in either triangle yields an undirected edge, so
    asymmetric inputs are symmetrized. Nonzero diagonal entries are rejected like explicit self-loops.
    """
    coo = sp.coo_matrix(adj)
    if coo.shape[0] != coo.shape[1]:
        raise GraphError(f"adjacency must be square, got {coo.shape}")
    mask = coo.data != 0
    edges = np.column_stack([coo.row[mask], coo.col[mask]])
    return build_graph(edges, coo.shape[0])


def normalize_adjacency(g: SparseGraph, add_self_loops: bool = False) -> NormalizedAdjacency:
    """Return ``D^{-1/2} A D^{-1/2}``; rows of isolated nodes stay empty.

    ``add_self_loops=True`` switches to the renormalized ``A + I`` variant.
    """
    if add_self_loops:
        a = (g.adjacency + sp.identity(g.n, format="csr")).tocsr()
        a.sort_indices()
        row_offsets, col_indices = a.indptr.astype(np.int64), a.indices.astype(np.int64)
        deg = g.degrees + 1.0
    else:
        row_offsets, col_indices = g.row_offsets, g.col_indices
        deg = g.degrees
    rows = np.repeat(np.arange(g.n), np.diff(row_offsets))
    # d_u * d_v is commutative, so Ã_uv == Ã_vu bit-exactly; stored entries have d > 0
    values = 1.0 / np.sqrt(deg[rows] * deg[col_indices])
    return NormalizedAdjacency(g.n, row_offsets, col_indices, values)


def spmm(a: NormalizedAdjacency | SparseGraph, M: np.ndarray) -> np.ndarray:
    """Sparse (n x n) times dense (n x c) product."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M[:, None]
    if M.shape[0] != a.n:
        raise ValueError(f"dense operand has {M.shape[0]} rows, graph has {a.n} nodes")
    mat = a.matrix if isinstance(a, NormalizedAdjacency) else a.adjacency
    return np.asarray(mat @ M)
