import itertools

import numpy as np
import pytest

from privgraph.errors import ConvergenceError, DomainError
from privgraph.generators import random_connected_graph, random_graph
from privgraph.graph import (
    CutQuery,
    Graph,
    cut_value,
    edge_endpoints,
    edge_id,
    graph_sum,
    is_connected,
    laplacian,
    max_unweighted_degree,
    max_weight_difference,
    num_slots,
    spectral_gap,
    spectral_norm_diff,
    weighted_degrees,
)


def _triangle(w01: float = 1.0) -> Graph:
    return Graph.from_edges(3, [(0, 1, w01), (0, 2, 1.0), (1, 2, 1.0)])


def test_edge_id_lexicographic_order():
    assert [edge_id(u, v, 4) for u, v in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]] == list(range(6))
    assert edge_id(3, 1, 4) == edge_id(1, 3, 4) == 4


@pytest.mark.parametrize("n", [2, 3, 7, 50, 123, 200])
def test_edge_endpoints_inverts_edge_id(n):
    for e in range(num_slots(n)):
        u, v = edge_endpoints(e, n)
        assert 0 <= u < v < n
        assert edge_id(u, v, n) == e


def test_edge_id_rejects_self_loop_and_range():
    with pytest.raises(DomainError):
        edge_id(2, 2, 4)
    with pytest.raises(DomainError):
        edge_id(0, 4, 4)
    with pytest.raises(DomainError):
        edge_endpoints(6, 4)


def test_graph_rejects_negative_unless_signed():
    with pytest.raises(DomainError):
        Graph(n=3, weights={0: -1.0})
    g = Graph(n=3, weights={0: -1.0}, signed=True)
    assert g.l1 == 1.0
    assert g.total_weight == -1.0


def test_graph_rejects_duplicate_and_nonfinite():
    with pytest.raises(DomainError):
        Graph.from_edges(3, [(0, 1, 1.0), (1, 0, 2.0)])
    with pytest.raises(DomainError):
        Graph(n=3, weights={0: float("inf")})
    with pytest.raises(DomainError):
        Graph(n=3, weights={3: 1.0})


def test_stored_zero_counts_as_topology_not_nnz():
    g = Graph(n=3, weights={0: 0.0, 1: 2.0})
    assert g.stored_count == 2
    assert g.nnz == 1
    assert max_unweighted_degree(g) == 2
    assert max_unweighted_degree(Graph.empty(4)) == 0


def test_from_vector_keeps_requested_zero_slots():
    vec = np.array([0.0, 1.5, 0.0])
    g = Graph.from_vector(3, vec, keep=np.array([2]))
    assert dict(g.weights) == {1: 1.5, 2: 0.0}
    np.testing.assert_array_equal(g.to_vector(), vec)


def test_laplacian_rows_sum_to_zero_and_degrees():
    g = _triangle(2.0)
    L = laplacian(g)
    np.testing.assert_allclose(L.sum(axis=1), 0.0)
    np.testing.assert_allclose(np.diag(L), weighted_degrees(g))
    np.testing.assert_allclose(weighted_degrees(g), [3.0, 3.0, 2.0])


def test_cut_value_triangle():
    g = _triangle()
    assert cut_value(g, CutQuery.complement({0}, 3)) == 2.0
    assert cut_value(g, CutQuery(S={0}, T={1})) == 1.0
    assert cut_value(g, CutQuery(S=set(), T={1, 2})) == 0.0


def test_cut_query_rejects_overlap_and_range():
    with pytest.raises(DomainError):
        CutQuery(S={0, 1}, T={1})
    with pytest.raises(DomainError):
        cut_value(_triangle(), CutQuery(S={0}, T={5}))


def test_connectivity_ignores_zero_weights():
    path = Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
    assert is_connected(path)
    assert not is_connected(Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 0.0)]))
    assert not is_connected(Graph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]))
    assert is_connected(Graph.empty(1))


def test_spectral_gap_of_complete_graph():
    assert spectral_gap(Graph.complete(6)) == pytest.approx(6.0, rel=1e-12)
    assert spectral_gap(Graph.empty(4)) == 0.0


def test_spectral_norm_diff_complete_vs_empty():
    assert spectral_norm_diff(Graph.complete(5), Graph.empty(5)) == pytest.approx(5.0, rel=1e-9)
    assert spectral_norm_diff(_triangle(), _triangle()) == 0.0


def test_spectral_norm_diff_matches_dense_norm(rng):
    n = 9
    star = Graph.from_edges(n, [(0, v, 10.0) for v in range(1, n)])
    g2 = Graph.from_vector(n, rng.random(num_slots(n)))
    g1 = graph_sum(star, Graph.from_vector(n, rng.random(num_slots(n))))
    expected = np.linalg.norm(laplacian(g1) - laplacian(g2), 2)
    assert spectral_norm_diff(g1, g2, rng=rng) == pytest.approx(expected, rel=1e-6)


def test_spectral_norm_diff_reports_best_estimate_on_cap(rng):
    n = 8
    g1 = Graph.from_vector(n, rng.random(num_slots(n)))
    with pytest.raises(ConvergenceError) as exc:
        spectral_norm_diff(g1, Graph.empty(n), rng=rng, max_iter=1)
    assert exc.value.best_estimate > 0


def test_graph_sum_and_max_weight_difference():
    a = Graph(n=3, weights={0: 1.0, 1: 2.0})
    b = Graph(n=3, weights={1: -0.5, 2: 4.0}, signed=True)
    s = graph_sum(a, b)
    assert dict(s.weights) == {0: 1.0, 1: 1.5, 2: 4.0}
    assert s.signed
    assert max_weight_difference(a, b) == 4.0
    with pytest.raises(DomainError):
        graph_sum(a, Graph.empty(4))


def test_scaled_marks_negative_factor_signed():
    g = _triangle().scaled(-2.0)
    assert g.signed
    assert g.weight(0, 1) == -2.0


def _disjoint_pairs(n):
    for digits in itertools.product(range(3), repeat=n):
        yield CutQuery(
            S={v for v, d in enumerate(digits) if d == 1},
            T={v for v, d in enumerate(digits) if d == 2},
        )


def test_cut_value_is_off_diagonal_laplacian_form(rng):
    for n in (4, 6):
        G = random_graph(n, n + 2, rng, law="uniform", scale=3.0)
        L = laplacian(G)
        for q in _disjoint_pairs(n):
            s, t = q.indicator(n)
            assert abs(cut_value(G, q) + s @ L @ t) <= 1e-9 * max(1.0, G.l1)


def test_cut_value_complement_is_quadratic_form(rng):
    G = random_graph(6, 8, rng, law="uniform", scale=2.0)
    L = laplacian(G)
    for mask in range(1 << 6):
        S = {v for v in range(6) if mask >> v & 1}
        s, _ = CutQuery.complement(S, 6).indicator(6)
        assert cut_value(G, CutQuery.complement(S, 6)) == pytest.approx(s @ L @ s, abs=1e-9)


def test_pair_cut_from_one_sided_cuts(rng):
    # 2 Phi(S,T) = Phi(S, V-S) + Phi(T, V-T) - Phi(S+T, V-S-T)
    for n in (5, 7, 8):
        G = random_graph(n, 2 * n, rng, law="uniform", scale=2.0)
        for q in _disjoint_pairs(n):
            one_sided = (
                cut_value(G, CutQuery.complement(q.S, n))
                + cut_value(G, CutQuery.complement(q.T, n))
                - cut_value(G, CutQuery.complement(q.S | q.T, n))
            )
            assert abs(2 * cut_value(G, q) - one_sided) <= 1e-9 * max(1.0, G.l1)


def test_spectral_gap_moves_by_at_most_two_per_unit_edge(rng):
    for _ in range(100):
        n = int(rng.integers(2, 13))
        G = random_connected_graph(n, int(rng.integers(0, n)), rng, law="uniform", scale=3.0)
        a, b = rng.choice(n, size=2, replace=False)
        e = edge_id(int(a), int(b), n)
        weights = dict(G.weights)
        weights[e] = weights.get(e, 0.0) + 1.0
        before = spectral_gap(G)
        after = spectral_gap(Graph(n=n, weights=weights))
        assert before - 1e-9 <= after <= before + 2.0 + 1e-6, (n, before, after)


def test_spectral_gap_of_two_disjoint_unit_edges():
    g = Graph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
    assert not is_connected(g)
    assert spectral_gap(g) == pytest.approx(2.0, rel=1e-12)
