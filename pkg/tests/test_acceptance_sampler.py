import math
import os
import time
from fractions import Fraction

import numpy as np
import pytest

from privgraph.graph import Graph
from privgraph.oracles import sampler_distribution_test
from privgraph.privacy import topology_distribution
from privgraph.sampler import (
    BernoulliProfile,
    build_table,
    configuration_probability,
    enumerate_conditional,
    sample_conditional,
)

pytestmark = [
    pytest.mark.slow,
    pytest.mark.skipif(os.environ.get("PRIVGRAPH_SLOW") != "1", reason="set PRIVGRAPH_SLOW=1 to run"),
]


def _random_profiles(rng, count):
    for _ in range(count):
        N = int(rng.choice([4, 6, 8]))
        k = int(rng.integers(1, N))
        yield BernoulliProfile.from_probabilities(rng.uniform(0.05, 0.95, size=N)), k


def test_sampler_matches_enumeration_on_random_profiles():
    rng = np.random.default_rng(31)
    for profile, k in _random_profiles(rng, 20):
        tv, p_value = sampler_distribution_test(profile, k, 200_000, rng)
        assert tv <= 0.02, (len(profile), k, tv)
        assert p_value > 0.0


@pytest.mark.parametrize("N", [6, 9, 12])
def test_rational_sequential_law_equals_enumeration(N):
    rng = np.random.default_rng(N)
    profile = BernoulliProfile.from_probabilities(rng.uniform(0.05, 0.95, size=N))
    k = N // 2
    law = enumerate_conditional(profile, k, exact=True)
    assert sum(law.values(), Fraction(0)) == 1
    for bits, expected in law.items():
        got = configuration_probability(profile, k, bits, exact=True)
        assert abs(float(got - expected)) <= 1e-12


def test_sampler_speed_at_desk_scale():
    N, k = 4950, 2475
    profile = BernoulliProfile.from_log_odds(np.random.default_rng(5).uniform(0.0, 2.0, size=N))
    started = time.perf_counter()
    table = build_table(profile, k)
    x = sample_conditional(profile, k, np.random.default_rng(6), table=table)
    elapsed = time.perf_counter() - started
    assert int(x.sum()) == k
    assert elapsed < 1.0


def test_neighbouring_inputs_bound_every_subset_ratio():
    epsilon = 0.5
    bound = math.exp(2 * epsilon)
    rng = np.random.default_rng(77)
    for _ in range(25):
        w = rng.uniform(0.0, 3.0, size=3)
        j = int(rng.integers(0, 3))
        w_neighbour = w.copy()
        w_neighbour[j] = max(0.0, w[j] + rng.uniform(-1.0, 1.0))
        law = topology_distribution(Graph.from_vector(3, w), 2, epsilon, exact=True)
        law_neighbour = topology_distribution(Graph.from_vector(3, w_neighbour), 2, epsilon, exact=True)
        assert set(law) == set(law_neighbour)
        for subset, pr in law.items():
            ratio = float(pr / law_neighbour[subset])
            assert 1.0 / bound - 1e-12 <= ratio <= bound + 1e-12
