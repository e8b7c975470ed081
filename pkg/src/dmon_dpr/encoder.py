"""One-layer graph convolution followed by a softmax pooling head."""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .graph import NormalizedAdjacency, spmm

SELU_SCALE = 1.0507009873554804934193349852946
SELU_ALPHA = 1.6732632423543772848170429916717


@dataclass
class ModelParams:
    """Learnable weights: encoder ``F x h`` plus pooling head ``h x k``."""

    W_enc: np.ndarray
    b_enc: np.ndarray
    W_pool: np.ndarray
    b_pool: np.ndarray

    @property
    def n_features(self) -> int:
        return self.W_enc.shape[0]

    @property
    def hidden(self) -> int:
        return self.W_enc.shape[1]

    @property
    def n_clusters(self) -> int:
        return self.W_pool.shape[1]

    def arrays(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def copy(self) -> "ModelParams":
        return ModelParams(**{k: v.copy() for k, v in self.arrays().items()})


@dataclass
class ForwardCache:
    """Intermediates of one forward pass, kept for the backward pass."""

    AX: np.ndarray  # Ã X, constant across epochs
    Z1: np.ndarray
    H: np.ndarray
    logits: np.ndarray
    C: np.ndarray
    dropout_mask: np.ndarray | None = None


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_params(seed: int, n_features: int, hidden: int, n_clusters: int) -> ModelParams:
    """Glorot-uniform weights and zero biases, reproducible for a given seed."""
    for name, v in (("n_features", n_features), ("hidden", hidden), ("n_clusters", n_clusters)):
        if v < 1:
            raise ValueError(f"{name} must be >= 1, got {v}")
    rng = np.random.default_rng(seed)
    return ModelParams(
        W_enc=glorot_uniform(rng, n_features, hidden),
        b_enc=np.zeros(hidden),
        W_pool=glorot_uniform(rng, hidden, n_clusters),
        b_pool=np.zeros(n_clusters),
    )


def selu(x: np.ndarray) -> np.ndarray:
    return SELU_SCALE * np.where(x > 0, x, SELU_ALPHA * np.expm1(np.minimum(x, 0.0)))


def selu_grad(x: np.ndarray) -> np.ndarray:
    return SELU_SCALE * np.where(x > 0, 1.0, SELU_ALPHA * np.exp(np.minimum(x, 0.0)))


def row_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    np.exp(z, out=z)
    z /= z.sum(axis=1, keepdims=True)
    return z


def forward(
    params: ModelParams,
    a_norm: NormalizedAdjacency,
    X: np.ndarray,
    AX: np.ndarray | None = None,
    dropout_mask: np.ndarray | None = None,
) -> ForwardCache:
    """Compute ``C = softmax(selu(Ã X W_enc + b_enc) W_pool + b_pool)``.

    ``AX`` may be passed to reuse a precomputed ``Ã X``. ``dropout_mask``
    (already scaled) multiplies the hidden layer when given.
    """
    if AX is None:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] != a_norm.n:
            raise ValueError(f"X has {X.shape[0]} rows, graph has {a_norm.n} nodes")
        AX = spmm(a_norm, X)
    if AX.shape[1] != params.n_features:
        raise ValueError(f"X has {AX.shape[1]} features, parameters expect {params.n_features}")

    Z1 = AX @ params.W_enc + params.b_enc
    H = selu(Z1)
    if dropout_mask is not None:
        H = H * dropout_mask
    logits = H @ params.W_pool + params.b_pool
    if not np.isfinite(logits).all():
        raise FloatingPointError("non-finite logits in forward pass")
    C = row_softmax(logits)
    return ForwardCache(AX=AX, Z1=Z1, H=H, logits=logits, C=C, dropout_mask=dropout_mask)


def hard_assignments(C: np.ndarray) -> np.ndarray:
    """Row-wise argmax; ties go to the lowest cluster index."""
    return np.argmax(C, axis=1)
