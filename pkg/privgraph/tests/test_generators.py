import numpy as np
import pytest

from privgraph.baselines import laplace_resistance_baseline, naive_cut_baseline, resistance_sensitivity_bound
from privgraph.errors import DomainError
from privgraph.generators import degree_capped_graph, draw_weights, random_connected_graph, random_graph
from privgraph.graph import Graph, is_connected, max_unweighted_degree, num_slots
from privgraph.privacy import BudgetLedger, PrivacyBudget


def test_weight_laws(rng):
    assert np.all(draw_weights("constant", 5, rng, scale=2.0) == 2.0)
    uniform = draw_weights("uniform", 1000, rng, scale=3.0)
    assert np.all((uniform > 0) & (uniform <= 3.0))
    heavy = draw_weights("heavy", 1000, rng, scale=50.0, heavy_prob=0.2)
    assert np.all(heavy > 0)
    assert 0.1 < np.mean(heavy > 1.0) < 0.3
    with pytest.raises(DomainError):
        draw_weights("pareto", 3, rng)
    with pytest.raises(DomainError):
        draw_weights("constant", 3, rng, scale=0.0)


def test_random_graph_edge_count(rng):
    G = random_graph(10, 17, rng)
    assert G.stored_count == 17
    assert G.nnz == 17
    with pytest.raises(DomainError):
        random_graph(4, 7, rng)


def test_degree_capped_graph(rng):
    G = degree_capped_graph(40, 4, rng)
    assert max_unweighted_degree(G) <= 4
    assert G.stored_count > 40
    small = degree_capped_graph(10, 3, rng, m=5)
    assert small.stored_count == 5


def test_random_connected_graph(rng):
    for n in (1, 2, 7, 20):
        G = random_connected_graph(n, 3, rng)
        assert is_connected(G)
        assert G.stored_count == min(n - 1 + 3, num_slots(n))


def test_generators_are_seeded():
    a = random_graph(12, 20, np.random.default_rng(4), law="uniform")
    b = random_graph(12, 20, np.random.default_rng(4), law="uniform")
    assert dict(a.weights) == dict(b.weights)


def test_naive_cut_baseline_keeps_every_slot(rng):
    G = random_graph(6, 4, rng)
    ledger = BudgetLedger()
    H = naive_cut_baseline(G, 1.0, rng, ledger)
    assert H.signed
    assert H.stored_count == num_slots(6)
    assert ledger.total() == PrivacyBudget(1.0)


def test_resistance_sensitivity_bound_on_complete_graph():
    assert resistance_sensitivity_bound(Graph.complete(6)) == pytest.approx(1.0 / 6.0)
    with pytest.raises(DomainError):
        resistance_sensitivity_bound(Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]))


def test_laplace_resistance_baseline(rng):
    G = Graph.complete(6, 2.0)
    ledger = BudgetLedger()
    R = laplace_resistance_baseline(G, 1.0, 1e-6, rng, ledger)
    assert R.shape == (6, 6)
    np.testing.assert_array_equal(R, R.T)
    np.testing.assert_array_equal(np.diag(R), 0.0)
    assert ledger.total() == PrivacyBudget(1.0, 1e-6)
