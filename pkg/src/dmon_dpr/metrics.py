"""Partition quality metrics, all reported in percent.

Graph metrics (conductance, modularity) need no labels; NMI and pairwise
F1 compare a hard partition against ground truth.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import SparseGraph
from .stats import paired_ttest  # noqa: F401  re-exported


@dataclass
class MetricsReport:
    conductance: float
    modularity: float
    nmi: float | None = None
    f1: float | None = None
    cluster_sizes: list[int] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"conductance": self.conductance, "modularity": self.modularity,
                "nmi": self.nmi, "f1": self.f1}


def _check_partition(p, n: int) -> np.ndarray:
    p = np.asarray(p)
    if p.ndim != 1 or len(p) != n:
        raise ValueError(f"partition must be a length-{n} vector, got shape {p.shape}")
    if len(p) and p.min() < 0:
        raise ValueError("cluster ids must be non-negative")
    return p.astype(np.int64)


def _cut_and_volume(p: np.ndarray, g: SparseGraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    k = int(p.max()) + 1 if len(p) else 0
    rows = np.repeat(np.arange(g.n), np.diff(g.row_offsets))
    crossing = p[rows] != p[g.col_indices]
    # each boundary edge is seen once from its inside endpoint
    cut = np.bincount(p[rows][crossing], minlength=k).astype(float)
    vol = np.bincount(p, weights=g.degrees, minlength=k)
    sizes = np.bincount(p, minlength=k)
    return cut, vol, sizes


def conductance(p, g: SparseGraph) -> float:
    """Unweighted mean over non-empty clusters of ``cut(S) / min(vol(S), 2m - vol(S))``."""
    p = _check_partition(p, g.n)
    if g.m == 0:
        raise ValueError("conductance is undefined on a graph without edges")
    cut, vol, sizes = _cut_and_volume(p, g)
    nz = sizes > 0
    denom = np.maximum(1e-12, np.minimum(vol[nz], 2.0 * g.m - vol[nz]))
    return float(100.0 * np.mean(cut[nz] / denom))


def modularity_q(p, g: SparseGraph) -> float:
    """Newman modularity of a hard partition, in percent."""
    p = _check_partition(p, g.n)
    if g.m == 0:
        raise ValueError("modularity is undefined on a graph without edges")
    two_m = 2.0 * g.m
    cut, vol, _ = _cut_and_volume(p, g)
    internal = vol - cut  # 2 * e_in(S)
    return float(100.0 * (internal.sum() - (vol ** 2).sum() / two_m) / two_m)


def contingency(labels, pred) -> np.ndarray:
    labels, pred = np.asarray(labels), np.asarray(pred)
    if labels.shape != pred.shape or labels.ndim != 1:
        raise ValueError(f"label and prediction vectors differ: {labels.shape} vs {pred.shape}")
    _, li = np.unique(labels, return_inverse=True)
    _, pi = np.unique(pred, return_inverse=True)
    table = np.zeros((li.max() + 1 if len(li) else 0, pi.max() + 1 if len(pi) else 0), dtype=np.int64)
    np.add.at(table, (li, pi), 1)
    return table


def _entropy(counts: np.ndarray, n: int) -> float:
    q = counts[counts > 0] / n
    return float(-(q * np.log(q)).sum())


def nmi(labels, pred) -> float:
    """Mutual information normalized by the arithmetic mean of the two entropies."""
    table = contingency(labels, pred)
    n = int(table.sum())
    if n == 0:
        raise ValueError("empty partitions")
    hu = _entropy(table.sum(axis=1), n)
    hv = _entropy(table.sum(axis=0), n)
    if hu == 0.0 and hv == 0.0:
        return 100.0
    if hu == 0.0 or hv == 0.0:
        return 0.0
    nonzero = table > 0
    if (nonzero.sum(axis=0) == 1).all() and (nonzero.sum(axis=1) == 1).all():
        return 100.0  # same partition up to relabeling
    r, c = np.nonzero(table)
    nij = table[r, c].astype(float)
    a, b = table.sum(axis=1)[r], table.sum(axis=0)[c]
    mi = float((nij / n * (np.log(nij * n) - np.log(a.astype(float) * b))).sum())
    return float(100.0 * max(0.0, min(1.0, mi / ((hu + hv) / 2.0))))


def _pairs(x: np.ndarray) -> float:
    x = x.astype(float)
    return float((x * (x - 1) / 2).sum())


def pairwise_f1(labels, pred) -> float:
    """F1 over unordered node pairs: positives are pairs sharing a predicted cluster."""
    table = contingency(labels, pred)
    tp = _pairs(table)
    pred_pos = _pairs(table.sum(axis=0))
    true_pos = _pairs(table.sum(axis=1))
    precision = tp / pred_pos if pred_pos else 0.0
    recall = tp / true_pos if true_pos else 0.0
    if precision + recall == 0:
        return 0.0
    return float(200.0 * precision * recall / (precision + recall))


def evaluate(p, g: SparseGraph, labels=None) -> MetricsReport:
    p = _check_partition(p, g.n)
    rep = MetricsReport(conductance=conductance(p, g), modularity=modularity_q(p, g),
                        cluster_sizes=np.bincount(p).tolist())
    if labels is not None:
        rep.nmi = nmi(labels, p)
        rep.f1 = pairwise_f1(labels, p)
    return rep
