"""scikit-learn compatible front end for the clustering model."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .data_io import Dataset
from .encoder import forward
from .graph import normalize_adjacency
from .metrics import modularity_q
from .objective import LossConfig
from .trainer import TrainConfig, train
from .validation import check_graph


class DMoNDPR(ClusterMixin, TransformerMixin, BaseEstimator):
    """Graph clustering by modularity maximization with diversity regularizers.

    A one-layer graph convolution (SELU) feeds a softmax pooling head that
    produces soft cluster assignments; training minimizes negative
    modularity plus a collapse penalty and, optionally, centroid-distance,
    assignment-variance and assignment-entropy terms.

    The graph is passed alongside the node features, e.g.
    ``DMoNDPR(n_clusters=7).fit(X, graph=adjacency)``, where ``graph`` is a
    :class:`~dmon_dpr.graph.SparseGraph`, a scipy sparse adjacency matrix,
    or an ``(E, 2)`` edge array.

    Parameters
    ----------
    n_clusters : int
        Number of clusters ``k``.
    hidden : int, default=512
        Width of the graph-convolution layer.
    epochs : int, default=1000
    lr : float, default=1e-3
        Adam learning rate.
    w_dist, w_var, w_entropy : float, default=0
        Weights of the centroid-distance, assignment-variance and entropy terms.
        With all three at zero the model is plain DMoN.
    epsilon : float, default=1.0
        Squared centroid distance below which cluster pairs are penalized.
    delta : float, default=1e-8
        Stabilizer inside the entropy logarithm.
    random_state : int, default=0
    record_every : int, default=10
        Stride of the loss history.
    dropout : float, default=0.0
    clip_norm : float or None, default=None
        Global gradient-norm clip; off by default.
    add_self_loops : bool, default=False

    Attributes
    ----------
    assignments_ : ndarray of shape (n_nodes, n_clusters)
        Soft assignments of the training graph.
    labels_ : ndarray of shape (n_nodes,)
    params_ : ModelParams
    history_ : TrainHistory
    """

    def __init__(self, n_clusters=8, *, hidden=512, epochs=1000, lr=1e-3, w_dist=0.0, w_var=0.0,
                 w_entropy=0.0, epsilon=1.0, delta=1e-8, random_state=0, record_every=10,
                 dropout=0.0, clip_norm=None, add_self_loops=False):
        self.n_clusters = n_clusters
        self.hidden = hidden
        self.epochs = epochs
        self.lr = lr
        self.w_dist = w_dist
        self.w_var = w_var
        self.w_entropy = w_entropy
        self.epsilon = epsilon
        self.delta = delta
        self.random_state = random_state
        self.record_every = record_every
        self.dropout = dropout
        self.clip_norm = clip_norm
        self.add_self_loops = add_self_loops

    def _train_config(self) -> TrainConfig:
        loss = LossConfig(w_dist=self.w_dist, w_var=self.w_var, w_ent=self.w_entropy,
                          epsilon=self.epsilon, delta=self.delta)
        return TrainConfig(n_clusters=self.n_clusters, epochs=self.epochs, lr=self.lr,
                           seed=self.random_state, hidden=self.hidden, loss=loss,
                           record_every=self.record_every, dropout=self.dropout,
                           clip_norm=self.clip_norm, add_self_loops=self.add_self_loops)

    def fit(self, X, y=None, *, graph=None):
        """Train on node features ``X`` over ``graph``. ``y`` is ignored."""
        X = check_array(X, dtype=np.float64)
        g = check_graph(graph, X.shape[0])
        cfg = self._train_config()
        params, C, history = train(Dataset(graph=g, X=X), cfg)
        self.params_ = params
        self.assignments_ = C
        self.labels_ = np.argmax(C, axis=1)
        self.history_ = history
        self.loss_ = history.losses[-1]
        self.graph_ = g
        self.n_features_in_ = X.shape[1]
        return self

    def _resolve_graph(self, X, graph):
        if graph is None:
            return check_graph(self.graph_, X.shape[0])
        return check_graph(graph, X.shape[0])

    def transform(self, X, graph=None):
        """Soft assignments for ``X`` over ``graph`` (default: the training graph)."""
        check_is_fitted(self, "params_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, model was fitted with {self.n_features_in_}")
        g = self._resolve_graph(X, graph)
        return forward(self.params_, normalize_adjacency(g, self.add_self_loops), X).C

    def predict(self, X, graph=None):
        return np.argmax(self.transform(X, graph), axis=1)

    def fit_predict(self, X, y=None, *, graph=None):
        return self.fit(X, graph=graph).labels_

    def fit_transform(self, X, y=None, *, graph=None):
        return self.fit(X, graph=graph).assignments_

    def score(self, X, y=None, graph=None):
        """Modularity (as a fraction) of the predicted hard partition."""
        g = self._resolve_graph(check_array(X, dtype=np.float64), graph)
        return modularity_q(self.predict(X, g), g) / 100.0
