"""Feature-space diagnostics of a clustering, and node feature richness."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .objective import EMPTY_CLUSTER_MASS, soft_centroids
from .validation import check_assignment

logger = logging.getLogger(__name__)


@dataclass
class DiversityReport:
    aicd: float
    micd: float
    aicv: float
    silhouette: float

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


def centroid_diagnostics(C: np.ndarray, X: np.ndarray) -> tuple[float, float]:
    """Mean and minimum Euclidean distance between soft cluster centroids."""
    C = check_assignment(C)
    X = np.asarray(X, dtype=np.float64)
    mu, mass = soft_centroids(C, X)
    mu = mu[mass > EMPTY_CLUSTER_MASS]
    if len(mu) < 2:
        raise ValueError("need at least two non-empty clusters")
    i, j = np.triu_indices(len(mu), k=1)
    dist = np.linalg.norm(mu[i] - mu[j], axis=1)
    return float(dist.mean()), float(dist.min())


def intra_cluster_variance(p, X: np.ndarray) -> float:
    """Per-dimension population variance within each cluster, averaged over
    dimensions and then over non-empty clusters."""
    p = np.asarray(p)
    X = np.asarray(X, dtype=np.float64)
    out = [X[p == c].var(axis=0).mean() for c in np.unique(p)]
    return float(np.mean(out))


def silhouette(p, X: np.ndarray, sample_cap: int = 5000, seed: int = 0, chunk: int = 1024) -> float:
    """Mean silhouette coefficient with Euclidean distances.

    Nodes in singleton clusters score 0. Above ``sample_cap`` nodes, the
    score is computed on a seeded uniform subsample.
    """
    p = np.asarray(p)
    X = np.asarray(X, dtype=np.float64)
    n = len(p)
    if n > sample_cap:
        idx = np.sort(np.random.default_rng(seed).choice(n, size=sample_cap, replace=False))
        p, X = p[idx], X[idx]
    ids, p = np.unique(p, return_inverse=True)
    k = len(ids)
    if k < 2:
        raise ValueError("silhouette needs at least two non-empty clusters")
    sizes = np.bincount(p, minlength=k).astype(float)
    onehot = np.zeros((len(p), k))
    onehot[np.arange(len(p)), p] = 1.0

    scores = np.empty(len(p))
    for start in range(0, len(p), chunk):
        sl = slice(start, start + chunk)
        D = cdist(X[sl], X)
        sums = D @ onehot
        own = p[sl]
        rows = np.arange(len(own))
        own_size = sizes[own]
        a = np.where(own_size > 1, sums[rows, own] / np.maximum(own_size - 1, 1), 0.0)
        mean_other = sums / sizes
        mean_other[rows, own] = np.inf
        b = mean_other.min(axis=1)
        s = np.where(own_size > 1, (b - a) / np.maximum(np.maximum(a, b), 1e-300), 0.0)
        scores[sl] = s
    return float(scores.mean())


def feature_richness(X: np.ndarray) -> tuple[float, int]:
    """Mean Shannon entropy (bits) of rows normalized to sum to one.

    Returns ``(mean_entropy, n_skipped)``; all-zero rows are skipped.
    """
    X = np.asarray(X, dtype=np.float64)
    if (X < 0).any():
        raise ValueError("feature richness requires non-negative features")
    totals = X.sum(axis=1)
    keep = totals > 0
    skipped = int((~keep).sum())
    if not keep.any():
        raise ValueError("every feature row sums to zero")
    if skipped:
        logger.info("feature richness: skipped %d all-zero rows", skipped)
    P = X[keep] / totals[keep, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(P > 0, P * np.log2(P), 0.0)
    return float(-plogp.sum(axis=1).mean()), skipped


def diversity_report(C: np.ndarray, X: np.ndarray, p=None, sample_cap: int = 5000, seed: int = 0
                     ) -> DiversityReport:
    if p is None:
        p = np.argmax(C, axis=1)
    try:
        aicd, micd = centroid_diagnostics(C, X)
    except ValueError:
        aicd = micd = float("nan")
    try:
        sil = silhouette(p, X, sample_cap=sample_cap, seed=seed)
    except ValueError:
        sil = float("nan")
    return DiversityReport(aicd=aicd, micd=micd, aicv=intra_cluster_variance(p, X), silhouette=sil)
