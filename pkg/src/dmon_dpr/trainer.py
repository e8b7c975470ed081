"""Backward pass, Adam and the full-batch training loop."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .encoder import ForwardCache, ModelParams, forward, init_params, selu_grad
from .graph import normalize_adjacency, spmm
from .objective import LossBreakdown, LossConfig, total_loss

logger = logging.getLogger(__name__)


class TrainingDivergedError(FloatingPointError):
    def __init__(self, epoch: int, detail: str = "non-finite loss"):
        super().__init__(f"{detail} at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    n_clusters: int
    epochs: int = 1000
    lr: float = 1e-3
    seed: int = 0
    hidden: int = 512
    loss: LossConfig = field(default_factory=LossConfig)
    record_every: int = 10
    dropout: float = 0.0
    clip_norm: float | None = None
    add_self_loops: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not self.lr > 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if self.n_clusters < 1:
            raise ValueError(f"n_clusters must be >= 1, got {self.n_clusters}")
        if self.loss.w_dist > 0 and self.n_clusters < 2:
            raise ValueError("the centroid-distance term needs n_clusters >= 2")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")


@dataclass
class TrainHistory:
    epochs: list[int] = field(default_factory=list)
    losses: list[LossBreakdown] = field(default_factory=list)
    mean_entropy: list[float] = field(default_factory=list)

    def record(self, epoch: int, breakdown: LossBreakdown, C: np.ndarray) -> None:
        self.epochs.append(epoch)
        self.losses.append(breakdown)
        self.mean_entropy.append(mean_assignment_entropy(C))

    def totals(self) -> np.ndarray:
        return np.array([b.total for b in self.losses])


def mean_assignment_entropy(C: np.ndarray) -> float:
    """Average Shannon entropy (nats) of the rows of ``C``, with 0 log 0 = 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(C > 0, C * np.log(C), 0.0)
    return float(-plogp.sum(axis=1).mean())


def backward(
    cache: ForwardCache,
    grad_C: np.ndarray,
    params: ModelParams,
    grad_X: np.ndarray | None = None,
) -> ModelParams:
    """Chain ``dL/dC`` back to the four parameter arrays.

    ``grad_X`` (from the centroid-distance term) is accepted and dropped:
    features are data, not parameters.
    """
    C = cache.C
    if grad_C.shape != C.shape:
        raise ValueError(f"grad_C has shape {grad_C.shape}, expected {C.shape}")
    del grad_X
    g_logits = C * (grad_C - np.einsum("ij,ij->i", grad_C, C)[:, None])
    g_W_pool = cache.H.T @ g_logits
    g_b_pool = g_logits.sum(axis=0)
    g_H = g_logits @ params.W_pool.T
    if cache.dropout_mask is not None:
        g_H *= cache.dropout_mask
    g_Z1 = g_H * selu_grad(cache.Z1)
    # Z1 = (Ã X) W_enc + b_enc with Ã X cached, so Ã^T never needs applying here
    g_W_enc = cache.AX.T @ g_Z1
    g_b_enc = g_Z1.sum(axis=0)
    return ModelParams(W_enc=g_W_enc, b_enc=g_b_enc, W_pool=g_W_pool, b_pool=g_b_pool)


class Adam:
    """Bias-corrected Adam over the arrays of a :class:`ModelParams`."""

    def __init__(self, params: ModelParams, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.arrays().items()}
        self.v = {k: np.zeros_like(v) for k, v in params.arrays().items()}

    def step(self, params: ModelParams, grads: ModelParams) -> None:
        """Update ``params`` in place."""
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        g_all = grads.arrays()
        for k, p in params.arrays().items():
            g = g_all[k]
            if g.shape != p.shape:
                raise ValueError(f"gradient for {k} has shape {g.shape}, expected {p.shape}")
            m, v = self.m[k], self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def adam_step(params: ModelParams, grads: ModelParams, state: Adam, lr: float | None = None) -> ModelParams:
    """Functional wrapper: returns updated parameters, mutating ``state``."""
    if lr is not None:
        state.lr = lr
    new = params.copy()
    state.step(new, grads)
    return new


def _clip(grads: ModelParams, max_norm: float) -> None:
    norm = np.sqrt(sum(float((g * g).sum()) for g in grads.arrays().values()))
    if norm > max_norm:
        for g in grads.arrays().values():
            g *= max_norm / norm


def train(dataset, cfg: TrainConfig, params: ModelParams | None = None
          ) -> tuple[ModelParams, np.ndarray, TrainHistory]:
    """Full-batch training on ``dataset`` (anything with ``.graph`` and ``.X``).

    Returns the final parameters, the soft assignment matrix from a last
    forward pass, and the recorded loss history.
    """
    g, X = dataset.graph, np.asarray(dataset.X, dtype=np.float64)
    if g.m == 0:
        raise ValueError("cannot train on a graph without edges")
    if X.shape[0] != g.n:
        raise ValueError(f"X has {X.shape[0]} rows, graph has {g.n} nodes")
    a_norm = normalize_adjacency(g, add_self_loops=cfg.add_self_loops)
    AX = spmm(a_norm, X)
    if params is None:
        params = init_params(cfg.seed, X.shape[1], cfg.hidden, cfg.n_clusters)
    opt = Adam(params, lr=cfg.lr)
    drop_rng = np.random.default_rng([cfg.seed, 1]) if cfg.dropout > 0 else None
    history = TrainHistory()

    for epoch in range(cfg.epochs):
        mask = None
        if drop_rng is not None:
            keep = 1.0 - cfg.dropout
            mask = (drop_rng.random((g.n, params.hidden)) < keep) / keep
        try:
            cache = forward(params, a_norm, X, AX=AX, dropout_mask=mask)
        except FloatingPointError as exc:
            raise TrainingDivergedError(epoch, str(exc)) from exc
        breakdown, grad_C, _ = total_loss(cache, g, X, cfg.loss)
        if not np.isfinite(breakdown.total):
            raise TrainingDivergedError(epoch)
        if epoch % cfg.record_every == 0:
            history.record(epoch, breakdown, cache.C)
        grads = backward(cache, grad_C, params)
        if cfg.clip_norm is not None:
            _clip(grads, cfg.clip_norm)
        opt.step(params, grads)

    cache = forward(params, a_norm, X, AX=AX)
    breakdown = total_loss(cache, g, X, cfg.loss)[0]
    if not np.isfinite(breakdown.total):
        raise TrainingDivergedError(cfg.epochs)
    history.record(cfg.epochs, breakdown, cache.C)
    logger.debug("seed %d finished: total loss %.6f", cfg.seed, breakdown.total)
    return params, cache.C, history
