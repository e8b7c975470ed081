"""Clustering losses over a soft assignment matrix and their gradients.

Every term returns ``(value, dL/dC)``; the centroid-distance term also
returns the gradient with respect to the features.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .encoder import ForwardCache
from .graph import SparseGraph, spmm

logger = logging.getLogger(__name__)

EMPTY_CLUSTER_MASS = 1e-12


@dataclass(frozen=True)
class LossConfig:
    """Weights of the three diversity terms, the centroid margin and the log stabilizer."""

    w_dist: float = 0.0
    w_var: float = 0.0
    w_ent: float = 0.0
    epsilon: float = 1.0
    delta: float = 1e-8

    def __post_init__(self):
        for name in ("w_dist", "w_var", "w_ent"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be a non-negative finite number, got {v}")
        if self.w_dist > 0 and not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0 when w_dist > 0, got {self.epsilon}")
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")


@dataclass(frozen=True)
class LossBreakdown:
    modularity_term: float
    collapse_term: float
    distance_term: float
    variance_term: float
    entropy_term: float
    total: float

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


def modularity_loss(C: np.ndarray, g: SparseGraph) -> tuple[float, np.ndarray]:
    """Negative soft modularity ``-Tr(C^T B C) / 2m`` without forming ``B``."""
    if g.m == 0:
        raise ValueError("modularity is undefined on a graph without edges")
    two_m = 2.0 * g.m
    AC = spmm(g, C)
    dC = g.degrees @ C  # d^T C, length k
    trace = np.einsum("ij,ij->", C, AC) - dC @ dC / two_m
    grad = -(2.0 * AC - np.outer(g.degrees, dC) / g.m) / two_m
    return -trace / two_m, grad


def collapse_loss(C: np.ndarray) -> tuple[float, np.ndarray]:
    """``sqrt(k)/n * ||cluster sizes||_2 - 1``; zero when clusters are balanced."""
    n, k = C.shape
    sizes = C.sum(axis=0)
    norm = np.linalg.norm(sizes)
    if norm == 0:
        raise ValueError("assignment matrix is all zero")
    scale = np.sqrt(k) / n
    grad = np.broadcast_to(scale * sizes / norm, C.shape).copy()
    return scale * norm - 1.0, grad


def soft_centroids(C: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Assignment-weighted feature means per cluster, and the cluster masses."""
    mass = C.sum(axis=0)
    safe = np.where(mass > EMPTY_CLUSTER_MASS, mass, 1.0)
    return (C.T @ X) / safe[:, None], mass


def distance_loss(C: np.ndarray, X: np.ndarray, epsilon: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Hinge penalty on squared centroid distances below ``epsilon``.

    Averaged over ordered pairs of distinct clusters. Clusters with
    (near-)zero mass are left out and the pair count shrinks accordingly.
    Returns ``(loss, dL/dC, dL/dX)``.
    """
    n, k = C.shape
    mu, mass = soft_centroids(C, X)
    alive = mass > EMPTY_CLUSTER_MASS
    ka = int(alive.sum())
    gC = np.zeros_like(C)
    gX = np.zeros_like(X, dtype=np.float64)
    if ka < k:
        logger.warning("distance term: skipping %d empty cluster(s)", k - ka)
    if ka < 2:
        return 0.0, gC, gX

    diff = mu[:, None, :] - mu[None, :, :]
    sq = np.einsum("ijf,ijf->ij", diff, diff)
    pair = alive[:, None] & alive[None, :]
    np.fill_diagonal(pair, False)
    hinge = np.where(pair, np.maximum(epsilon - sq, 0.0), 0.0)
    n_pairs = ka * (ka - 1)
    # each hinge is at most epsilon; clamp the rounding of the average onto that bound
    loss = min(hinge.sum() / n_pairs, epsilon)

    active = (hinge > 0).astype(np.float64)
    # d/dmu_i of sum_{i!=j} relu(eps - |mu_i - mu_j|^2); both orderings contribute
    g_mu = -4.0 / n_pairs * np.einsum("ij,ijf->if", active, diff)
    inv_mass = np.where(alive, 1.0 / np.where(alive, mass, 1.0), 0.0)
    g_mu *= inv_mass[:, None]
    # mu_i = sum_v C_vi X_v / mass_i  =>  dmu_i/dC_vi = (X_v - mu_i) / mass_i
    gC = X @ g_mu.T - np.einsum("if,if->i", g_mu, mu)[None, :]
    gX = C @ g_mu
    return float(loss), gC, gX


def variance_loss(C: np.ndarray) -> tuple[float, np.ndarray]:
    """Negative mean (population) column variance of ``C``."""
    n, k = C.shape
    centered = C - C.mean(axis=0)
    loss = -np.einsum("ij,ij->", centered, centered) / (n * k)
    return float(loss), -2.0 / (k * n) * centered


def entropy_loss(C: np.ndarray, delta: float = 1e-8) -> tuple[float, np.ndarray]:
    """Mean per-node Shannon entropy (nats), stabilized by ``delta``."""
    n = C.shape[0]
    logc = np.log(C + delta)
    loss = -np.einsum("ij,ij->", C, logc) / n
    grad = -(logc + C / (C + delta)) / n
    return float(loss), grad


def total_loss(
    cache: ForwardCache | np.ndarray, g: SparseGraph, X: np.ndarray, cfg: LossConfig
) -> tuple[LossBreakdown, np.ndarray, np.ndarray]:
    """Combined objective; returns ``(breakdown, dTotal/dC, dTotal/dX)``.

    Terms with zero weight are still evaluated for reporting but add no
    gradient.
    """
    C = cache.C if isinstance(cache, ForwardCache) else np.asarray(cache)
    mod, g_mod = modularity_loss(C, g)
    col, g_col = collapse_loss(C)
    var, g_var = variance_loss(C)
    ent, g_ent = entropy_loss(C, cfg.delta)
    grad = g_mod + g_col
    if cfg.w_var:
        grad += cfg.w_var * g_var
    if cfg.w_ent:
        grad += cfg.w_ent * g_ent

    if cfg.w_dist:
        dist, g_dist, gX = distance_loss(C, X, cfg.epsilon)
        grad += cfg.w_dist * g_dist
        gX = cfg.w_dist * gX
    else:
        dist, gX = 0.0, np.zeros(np.shape(X))
        if X is not None and C.shape[1] > 1:
            dist = distance_loss(C, X, cfg.epsilon)[0]

    total = mod + col + cfg.w_dist * dist + cfg.w_var * var + cfg.w_ent * ent
    return LossBreakdown(float(mod), float(col), float(dist), var, ent, float(total)), grad, gX
