import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmon_dpr.graph import build_graph
from dmon_dpr.objective import (LossConfig, collapse_loss, distance_loss, entropy_loss, modularity_loss,
                                soft_centroids, total_loss, variance_loss)
from oracles import (central_difference, dense_adjacency, dense_modularity_loss, dense_q, max_rel_error,
                     random_graph, random_stochastic)

TWO_CLIQUES = [e for base in (0, 4) for e in itertools.combinations(range(base, base + 4), 2)]


def _connected_random(rng, n, p=0.3):
    edges = random_graph(rng, n, p)
    while not edges:
        edges = random_graph(rng, n, p)
    return edges, build_graph(edges, n)


# --- modularity -------------------------------------------------------------

def test_modularity_single_cluster_zero(rng):
    _, g = _connected_random(rng, 9)
    assert modularity_loss(np.ones((9, 1)), g)[0] == pytest.approx(0, abs=1e-15)


def test_modularity_uniform_zero(rng):
    _, g = _connected_random(rng, 9)
    assert modularity_loss(np.full((9, 4), 0.25), g)[0] == pytest.approx(0, abs=1e-15)


def test_modularity_two_cliques_matches_dense():
    g = build_graph(TWO_CLIQUES, 8)
    C = np.repeat(np.eye(2), 4, axis=0)
    Q = dense_q([0] * 4 + [1] * 4, dense_adjacency(TWO_CLIQUES, 8))
    assert Q == pytest.approx(50.0)  # two equal disjoint components
    assert modularity_loss(C, g)[0] == pytest.approx(-Q / 100, abs=1e-12)


def test_modularity_empty_graph():
    with pytest.raises(ValueError):
        modularity_loss(np.ones((3, 1)), build_graph([], 3))


def test_trace_identity_random(rng):
    for _ in range(40):
        n = int(rng.integers(2, 33))
        edges, g = _connected_random(rng, n, 0.3)
        C = random_stochastic(rng, n, int(rng.integers(1, 6)))
        assert abs(modularity_loss(C, g)[0] - dense_modularity_loss(C, dense_adjacency(edges, n))) <= 1e-9


# --- collapse ---------------------------------------------------------------

def test_collapse_balanced_zero():
    C = np.repeat(np.eye(3), 4, axis=0)
    assert collapse_loss(C)[0] == pytest.approx(0, abs=1e-15)


def test_collapse_all_in_one():
    C = np.zeros((10, 4))
    C[:, 2] = 1
    assert collapse_loss(C)[0] == pytest.approx(math.sqrt(4) - 1)


def test_collapse_direct_formula(rng):
    C = random_stochastic(rng, 10, 3)
    sizes = [sum(C[v, i] for v in range(10)) for i in range(3)]
    expected = math.sqrt(3) / 10 * math.sqrt(sum(s * s for s in sizes)) - 1
    assert collapse_loss(C)[0] == pytest.approx(expected, abs=1e-14)


def test_collapse_zero_input():
    with pytest.raises(ValueError):
        collapse_loss(np.zeros((3, 2)))


# --- distance ---------------------------------------------------------------

def test_distance_identical_centroids_equals_epsilon():
    X = np.array([[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]])
    C = np.array([[0.2, 0.3, 0.5], [0.6, 0.1, 0.3], [0.3, 0.3, 0.4]])
    assert distance_loss(C, X, 0.7)[0] == pytest.approx(0.7)


def test_distance_far_apart_zero():
    X = np.array([[0.0], [10.0], [20.0]])
    C = np.eye(3)
    loss, gC, gX = distance_loss(C, X, 1.0)
    assert loss == 0.0 and not gC.any() and not gX.any()


def test_distance_k2_hand_instance():
    X = np.array([[0.0], [1.0], [3.0]])
    C = np.array([[0.9, 0.1], [0.5, 0.5], [0.2, 0.8]])
    mu0 = (0.9 * 0 + 0.5 * 1 + 0.2 * 3) / 1.6
    mu1 = (0.1 * 0 + 0.5 * 1 + 0.8 * 3) / 1.4
    eps = 4.0
    expected = (2 * max(eps - (mu0 - mu1) ** 2, 0)) / 2
    loss, gC, gX = distance_loss(C, X, eps)
    assert loss == pytest.approx(expected, abs=1e-14)
    num_C = central_difference(lambda: distance_loss(C, X, eps)[0], C)
    num_X = central_difference(lambda: distance_loss(C, X, eps)[0], X)
    assert max_rel_error(gC, num_C) <= 1e-4
    assert max_rel_error(gX, num_X) <= 1e-4


def test_distance_empty_cluster_skipped(caplog):
    X = np.array([[0.0], [0.1], [5.0]])
    C = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
    loss, _, _ = distance_loss(C, X, 1.0)
    # only clusters 0 and 1 survive: centroids 2.5 and 0.1, squared distance 5.76
    assert loss == 0.0
    assert "empty cluster" in caplog.text
    loss2, _, _ = distance_loss(C, X, 10.0)
    assert loss2 == pytest.approx(10.0 - 2.4 ** 2)


# --- variance ---------------------------------------------------------------

def test_variance_uniform_zero():
    assert variance_loss(np.full((6, 3), 1 / 3))[0] == pytest.approx(0, abs=1e-16)


def test_variance_balanced_one_hot():
    C = np.array([[1.0, 0.0], [0.0, 1.0]] * 3)
    assert variance_loss(C)[0] == pytest.approx(-0.25)


def test_variance_two_pass(rng):
    C = random_stochastic(rng, 7, 3)
    total = 0.0
    for i in range(3):
        col = C[:, i]
        mean = sum(col) / 7
        total += sum((x - mean) ** 2 for x in col) / 7
    assert variance_loss(C)[0] == pytest.approx(-total / 3, abs=1e-15)


# --- entropy ----------------------------------------------------------------

def test_entropy_one_hot_near_zero():
    C = np.repeat(np.eye(4), 2, axis=0)
    loss = entropy_loss(C, 1e-8)[0]
    assert -4 * 1e-8 <= loss <= 1e-12


def test_entropy_uniform():
    assert entropy_loss(np.full((5, 4), 0.25), 1e-8)[0] == pytest.approx(math.log(4), abs=1e-7)


def test_entropy_direct(rng):
    C = random_stochastic(rng, 6, 3)
    d = 1e-8
    expected = -sum(C[v, i] * math.log(C[v, i] + d) for v in range(6) for i in range(3)) / 6
    assert entropy_loss(C, d)[0] == pytest.approx(expected, abs=1e-14)


# --- gradients w.r.t. C / X --------------------------------------------------

def _safe_epsilon(C, X):
    """An epsilon inside the widest gap of squared centroid distances, away from any hinge."""
    mu, _ = soft_centroids(C, X)
    sq = sorted(((mu[i] - mu[j]) ** 2).sum() for i, j in itertools.combinations(range(len(mu)), 2))
    if len(sq) == 1:
        return 2 * sq[0]
    return max((b - a, (a + b) / 2) for a, b in zip(sq, sq[1:]))[1]


@pytest.mark.parametrize("seed", range(5))
def test_term_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n, k, F = int(rng.integers(4, 21)), int(rng.integers(2, 5)), int(rng.integers(1, 9))
    edges, g = _connected_random(rng, n, 0.4)
    C = random_stochastic(rng, n, k)
    X = rng.normal(size=(n, F))
    eps = _safe_epsilon(C, X)
    terms = {
        "modularity": lambda: modularity_loss(C, g),
        "collapse": lambda: collapse_loss(C),
        "variance": lambda: variance_loss(C),
        "entropy": lambda: entropy_loss(C, 1e-8),
        "distance": lambda: distance_loss(C, X, eps)[:2],
    }
    for name, fn in terms.items():
        grad = fn()[1]
        num = central_difference(lambda: fn()[0], C)
        assert max_rel_error(grad, num) <= 1e-4, name
    gX = distance_loss(C, X, eps)[2]
    assert max_rel_error(gX, central_difference(lambda: distance_loss(C, X, eps)[0], X)) <= 1e-4


# --- combined ---------------------------------------------------------------

def test_total_reduces_to_dmon(rng):
    _, g = _connected_random(rng, 10)
    C = random_stochastic(rng, 10, 3)
    X = rng.normal(size=(10, 2))
    br, grad, gX = total_loss(C, g, X, LossConfig())
    assert br.total == modularity_loss(C, g)[0] + collapse_loss(C)[0]
    np.testing.assert_array_equal(grad, modularity_loss(C, g)[1] + collapse_loss(C)[1])
    assert not gX.any()


def test_total_coincident_centroids(rng):
    _, g = _connected_random(rng, 6)
    C = random_stochastic(rng, 6, 3)
    X = np.ones((6, 2))
    br, _, _ = total_loss(C, g, X, LossConfig(w_dist=1.0, epsilon=0.3))
    assert br.total == pytest.approx(br.modularity_term + br.collapse_term + 0.3, abs=1e-12)


def test_total_termwise(rng):
    _, g = _connected_random(rng, 6, 0.5)
    C = random_stochastic(rng, 6, 3)
    X = rng.normal(size=(6, 4))
    cfg = LossConfig(w_dist=1.0, w_var=0.1, w_ent=0.01, epsilon=2.0)
    br, grad, gX = total_loss(C, g, X, cfg)
    parts = [modularity_loss(C, g), collapse_loss(C), distance_loss(C, X, 2.0), variance_loss(C),
             entropy_loss(C, cfg.delta)]
    weights = [1, 1, 1.0, 0.1, 0.01]
    expected = sum(w * p[0] for w, p in zip(weights, parts))
    assert br.total == pytest.approx(expected, abs=1e-12)
    assert br.total == pytest.approx(br.modularity_term + br.collapse_term + cfg.w_dist * br.distance_term
                                     + cfg.w_var * br.variance_term + cfg.w_ent * br.entropy_term, abs=1e-12)
    np.testing.assert_allclose(grad, sum(w * p[1] for w, p in zip(weights, parts)), atol=1e-14)
    np.testing.assert_allclose(gX, parts[2][2], atol=1e-14)


@pytest.mark.parametrize("kwargs", [dict(w_dist=-1), dict(w_dist=1, epsilon=0), dict(delta=0)])
def test_loss_config_validation(kwargs):
    with pytest.raises(ValueError):
        LossConfig(**kwargs)


# --- properties ---------------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 20), k=st.integers(2, 5),
       sharp=st.floats(0.1, 20), eps=st.floats(1e-3, 10))
def test_bounds_and_column_permutation(seed, n, k, sharp, eps):
    rng = np.random.default_rng(seed)
    edges, g = _connected_random(rng, n, 0.4)
    C = random_stochastic(rng, n, k, sharp)
    X = rng.normal(size=(n, 3))
    cfg = LossConfig(w_dist=1, w_var=1, w_ent=1, epsilon=eps)
    br = total_loss(C, g, X, cfg)[0]
    assert 0 <= br.distance_term <= eps
    assert -1e-12 <= br.collapse_term <= math.sqrt(k) - 1 + 1e-12
    assert -0.25 <= br.variance_term <= 0
    assert -cfg.delta <= br.entropy_term <= math.log(k) + 1e-12

    perm = rng.permutation(k)
    br2 = total_loss(C[:, perm], g, X, cfg)[0]
    for a, b in zip(br.as_dict().values(), br2.as_dict().values()):
        assert abs(a - b) <= 1e-12
