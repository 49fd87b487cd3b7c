import numpy as np
import pytest

from privgraph.errors import CapacityError, DomainError
from privgraph.generators import random_connected_graph, random_graph
from privgraph.graph import CutQuery, Graph, num_slots
from privgraph.oracles import (
    brute_force_max_cut_error,
    brute_force_max_cut_error_pairs,
    sampler_distribution_test,
    simulate_cover_time,
    simulate_hitting_time,
    spectral_error,
)
from privgraph.analytics import hitting_times_exact
from privgraph.sampler import BernoulliProfile, build_table


def _triangle(w01: float = 1.0) -> Graph:
    return Graph.from_edges(3, [(0, 1, w01), (0, 2, 1.0), (1, 2, 1.0)])


def test_identical_graphs_have_zero_error():
    error, witness = brute_force_max_cut_error(_triangle(), _triangle())
    assert error == 0.0
    assert witness == CutQuery(S=frozenset(), T=frozenset())


def test_triangle_with_heavier_edge():
    error, witness = brute_force_max_cut_error(_triangle(), _triangle(2.0))
    assert error == 1.0
    assert witness == CutQuery(S={0}, T={1})


def test_single_heavy_edge_against_empty():
    H = Graph.from_edges(4, [(1, 3, 5.0)])
    error, witness = brute_force_max_cut_error(Graph.empty(4), H)
    assert error == 5.0
    assert {1, 3} == set(witness.S | witness.T)


def test_two_oracles_agree(rng):
    for _ in range(10):
        n = int(rng.integers(2, 9))
        G = random_graph(n, int(rng.integers(0, num_slots(n) + 1)), rng, law="uniform", scale=3.0)
        noise = Graph.from_vector(n, rng.normal(size=num_slots(n)), signed=True)
        ternary, _ = brute_force_max_cut_error(G, noise)
        assert ternary == pytest.approx(brute_force_max_cut_error_pairs(G, noise), rel=1e-12, abs=1e-12)


def test_cut_oracle_capacity():
    with pytest.raises(CapacityError):
        brute_force_max_cut_error(Graph.empty(14), Graph.empty(14))
    with pytest.raises(CapacityError):
        brute_force_max_cut_error_pairs(Graph.empty(9), Graph.empty(9))
    with pytest.raises(DomainError):
        brute_force_max_cut_error(Graph.empty(3), Graph.empty(4))


def test_spectral_error_of_identical_graphs():
    assert spectral_error(_triangle(), _triangle()) == 0.0


def test_distribution_test_accepts_exact_sampler(rng):
    profile = BernoulliProfile.from_probabilities(rng.uniform(0.1, 0.9, size=6))
    tv, pvalue = sampler_distribution_test(profile, 3, 200_000, rng)
    assert tv <= 0.02
    assert pvalue > 1e-4


def _off_by_one_sampler(profile, k, rng, size):
    # Reads the remaining count one too high when choosing each coordinate.
    table = build_table(profile, k)
    lt = table.log_table
    N = len(profile)
    x = np.zeros((size, N), dtype=np.int8)
    remaining = np.full(size, k, dtype=np.int64)
    for i in range(N):
        r = np.minimum(remaining + 1, k)
        num = profile.log_p[i] + lt[i + 1][np.maximum(r - 1, 0)]
        den = np.logaddexp(num, profile.log_1mp[i] + lt[i + 1][r])
        with np.errstate(invalid="ignore"):
            marginal = np.exp(num - den)
        marginal = np.where(remaining == 0, 0.0, marginal)
        marginal = np.where(remaining >= N - i, 1.0, marginal)
        take = rng.random(size) < marginal
        x[:, i] = take
        remaining -= take
    return x


def test_distribution_test_rejects_corrupted_sampler(rng):
    profile = BernoulliProfile.from_probabilities(rng.uniform(0.2, 0.8, size=6))
    tv, pvalue = sampler_distribution_test(profile, 3, 20_000, rng, sampler=_off_by_one_sampler)
    assert pvalue < 1e-6
    assert tv > 0.02


def test_distribution_test_point_mass(rng):
    profile = BernoulliProfile.from_probabilities([0.3, 0.6, 0.5])
    assert sampler_distribution_test(profile, 0, 1000, rng) == (0.0, 1.0)


def test_distribution_test_flags_out_of_support_draws(rng):
    profile = BernoulliProfile.from_probabilities([0.3, 0.6, 0.5, 0.5])

    def wrong_count(profile, k, rng, size):
        return np.ones((size, len(profile)), dtype=np.int8)

    tv, pvalue = sampler_distribution_test(profile, 2, 100, rng, sampler=wrong_count)
    assert pvalue == 0.0
    assert tv == pytest.approx(1.0)


def test_distribution_test_capacity(rng):
    with pytest.raises(CapacityError):
        sampler_distribution_test(BernoulliProfile.from_probabilities([0.5] * 21), 2, 10, rng)


def test_hitting_simulation_matches_linear_system(rng):
    G = random_connected_graph(5, 3, rng, law="uniform", scale=2.0)
    exact = hitting_times_exact(G, 4).values[0]
    mean, stderr = simulate_hitting_time(G, 0, 4, 20_000, rng)
    assert abs(mean - exact) <= 4 * stderr


def test_cover_simulation_on_triangle(rng):
    mean, stderr = simulate_cover_time(_triangle(), 0, 20_000, rng)
    assert abs(mean - 3.0) <= 4 * stderr


def test_walk_simulation_needs_connected_graph(rng):
    with pytest.raises(DomainError):
        simulate_hitting_time(Graph.from_edges(4, [(0, 1, 1.0)]), 0, 3, 10, rng)
