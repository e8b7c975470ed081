import itertools
import math

import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from dmon_dpr.graph import build_graph
from dmon_dpr.metrics import (conductance, contingency, evaluate, modularity_q, nmi, paired_ttest,
                              pairwise_f1)
from dmon_dpr.objective import modularity_loss
from dmon_dpr.stats import betainc, t_sf_two_sided
from oracles import brute_conductance, brute_nmi, brute_pair_f1, dense_adjacency, dense_q, random_graph

TWO_CLIQUES = [e for base in (0, 4) for e in itertools.combinations(range(base, base + 4), 2)]
# two triangles joined by the bridge 2-3
BARBELL = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]


def _nonempty_graph(rng, n, p=0.3):
    edges = random_graph(rng, n, p)
    while not edges:
        edges = random_graph(rng, n, p)
    return edges, build_graph(edges, n)


# --- conductance ------------------------------------------------------------

def test_conductance_disjoint_cliques_zero():
    g = build_graph(TWO_CLIQUES, 8)
    assert conductance([0] * 4 + [1] * 4, g) == 0.0


def test_conductance_single_cluster_zero():
    assert conductance([0] * 6, build_graph(BARBELL, 6)) == 0.0


def test_conductance_barbell():
    g = build_graph(BARBELL, 6)
    p = [0, 0, 0, 1, 1, 1]
    # each side: one cut edge, volume 7 out of 2m = 14
    assert conductance(p, g) == pytest.approx(100 / 7, abs=1e-12)
    assert conductance(p, g) == pytest.approx(brute_conductance(p, dense_adjacency(BARBELL, 6)), abs=1e-12)


def test_conductance_cleaner_cut_is_lower():
    g = build_graph(BARBELL, 6)
    assert conductance([0, 0, 0, 1, 1, 1], g) < conductance([0, 0, 1, 1, 0, 1], g)


def test_metrics_need_edges():
    g = build_graph([], 3)
    with pytest.raises(ValueError):
        conductance([0, 1, 0], g)
    with pytest.raises(ValueError):
        modularity_q([0, 1, 0], g)


def test_partition_length_checked():
    with pytest.raises(ValueError):
        conductance([0, 1], build_graph(BARBELL, 6))


# --- modularity ---------------------------------------------------------------

def test_modularity_single_cluster_zero():
    assert modularity_q([0] * 6, build_graph(BARBELL, 6)) == pytest.approx(0, abs=1e-12)


def test_modularity_two_cliques():
    g = build_graph(TWO_CLIQUES, 8)
    p = [0] * 4 + [1] * 4
    assert modularity_q(p, g) == pytest.approx(dense_q(p, dense_adjacency(TWO_CLIQUES, 8)), abs=1e-12)
    assert modularity_q(p, g) == pytest.approx(50.0)


def test_modularity_matches_loss_at_one_hot(rng):
    for _ in range(20):
        n = int(rng.integers(4, 30))
        k = int(rng.integers(1, 6))
        _, g = _nonempty_graph(rng, n)
        p = rng.integers(0, k, size=n)
        C = np.eye(k)[p]
        assert abs(modularity_q(p, g) + 100 * modularity_loss(C, g)[0]) <= 1e-9


# --- NMI ----------------------------------------------------------------------

def test_nmi_identical():
    assert nmi([0, 0, 1, 1, 2], [0, 0, 1, 1, 2]) == 100.0
    assert nmi([0, 0, 1, 1, 2], [2, 2, 0, 0, 1]) == 100.0


def test_nmi_constant_prediction():
    assert nmi([0, 1, 2, 0], [5, 5, 5, 5]) == 0.0


def test_nmi_eight_element_contingency():
    labels = [0, 0, 0, 1, 1, 1, 2, 2]
    pred = [0, 0, 1, 1, 1, 1, 0, 2]
    table = contingency(labels, pred)
    assert table.tolist() == [[2, 1, 0], [0, 3, 0], [1, 0, 1]]
    n = 8
    pu, pv = [3 / 8, 3 / 8, 2 / 8], [3 / 8, 4 / 8, 1 / 8]
    cells = {(0, 0): 2, (0, 1): 1, (1, 1): 3, (2, 0): 1, (2, 2): 1}
    mi = sum(c / n * math.log((c / n) / (pu[i] * pv[j])) for (i, j), c in cells.items())
    hu = -sum(q * math.log(q) for q in pu)
    hv = -sum(q * math.log(q) for q in pv)
    assert nmi(labels, pred) == pytest.approx(100 * mi / ((hu + hv) / 2), abs=1e-12)


def test_nmi_length_mismatch():
    with pytest.raises(ValueError):
        nmi([0, 1], [0, 1, 1])


# --- pairwise F1 ----------------------------------------------------------------

def test_f1_identical():
    assert pairwise_f1([1, 1, 0, 2, 2], [0, 0, 1, 2, 2]) == pytest.approx(100.0)


def test_f1_singletons_zero():
    assert pairwise_f1([0, 0, 1, 1], [0, 1, 2, 3]) == 0.0


def test_f1_random_matches_enumeration(rng):
    for _ in range(10):
        labels = rng.integers(0, 3, size=10)
        pred = rng.integers(0, 4, size=10)
        assert pairwise_f1(labels, pred) == pytest.approx(brute_pair_f1(labels, pred), abs=1e-10)


def test_f1_length_mismatch():
    with pytest.raises(ValueError):
        pairwise_f1([0, 1], [0])


# --- combined / properties ------------------------------------------------------

def test_evaluate_report():
    g = build_graph(BARBELL, 6)
    rep = evaluate([0, 0, 0, 1, 1, 1], g, labels=[0, 0, 0, 1, 1, 1])
    assert rep.nmi == 100.0 and rep.f1 == pytest.approx(100.0)
    assert rep.cluster_sizes == [3, 3]
    assert set(rep.as_dict()) == {"conductance", "modularity", "nmi", "f1"}
    assert evaluate([0, 0, 0, 1, 1, 1], g).nmi is None


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 40))
def test_metrics_match_oracles_and_relabeling(seed, n):
    rng = np.random.default_rng(seed)
    edges, g = _nonempty_graph(rng, n, 0.3)
    A = dense_adjacency(edges, n)
    p = rng.integers(0, int(rng.integers(1, 6)), size=n)
    labels = rng.integers(0, int(rng.integers(1, 5)), size=n)

    assert abs(conductance(p, g) - brute_conductance(p, A)) <= 1e-10
    assert abs(modularity_q(p, g) - dense_q(p, A)) <= 1e-10
    assert abs(nmi(labels, p) - brute_nmi(labels, p)) <= 1e-10
    assert abs(pairwise_f1(labels, p) - brute_pair_f1(labels, p)) <= 1e-10

    rep = evaluate(p, g, labels)
    assert 0 <= rep.conductance <= 100 and 0 <= rep.nmi <= 100 and 0 <= rep.f1 <= 100
    assert -50 <= rep.modularity <= 100

    perm = rng.permutation(10)
    assert abs(nmi(perm[labels], p) - nmi(labels, p)) <= 1e-10
    assert abs(nmi(labels, perm[p]) - nmi(labels, p)) <= 1e-10
    assert abs(pairwise_f1(labels, perm[p]) - pairwise_f1(labels, p)) <= 1e-10


# --- paired t-test --------------------------------------------------------------

def test_ttest_identical():
    a = [70.1, 68.2, 71.5]
    assert paired_ttest(a, a) == (0.0, 1.0)


def test_ttest_constant_difference():
    t, p = paired_ttest([2.0, 3.0, 4.0], [1.0, 2.0, 3.0])
    assert t == math.inf and p == 0.0
    t, p = paired_ttest([1.0, 2.0, 3.0], [2.0, 3.0, 4.0])
    assert t == -math.inf and p == 0.0


def test_ttest_errors():
    with pytest.raises(ValueError):
        paired_ttest([1.0], [2.0])
    with pytest.raises(ValueError):
        paired_ttest([1.0, 2.0], [2.0])


def test_ttest_matches_scipy(rng):
    for n in (2, 3, 5, 10, 30):
        a, b = rng.normal(size=n), rng.normal(0.3, 1.2, size=n)
        t, p = paired_ttest(a, b)
        ref = scipy.stats.ttest_rel(a, b)
        assert t == pytest.approx(ref.statistic, rel=1e-12)
        assert p == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(0.05, 50), b=st.floats(0.05, 50), x=st.floats(0, 1))
def test_betainc_matches_scipy(a, b, x):
    assert betainc(a, b, x) == pytest.approx(scipy.special.betainc(a, b, x), rel=1e-9, abs=1e-13)


def test_t_tail_values():
    assert t_sf_two_sided(0.0, 9) == pytest.approx(1.0)
    assert t_sf_two_sided(2.262157, 9) == pytest.approx(0.05, abs=1e-6)
    assert t_sf_two_sided(math.inf, 9) == 0.0
