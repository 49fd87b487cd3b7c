import math
import os
from pathlib import Path

import numpy as np
import pytest

from privgraph.cuts import cut_release
from privgraph.experiment import ExperimentConfig, run_experiment
from privgraph.generators import random_graph
from privgraph.mirror_descent import MirrorDescentConfig
from privgraph.privacy import BudgetLedger, PrivacyBudget, compose_advanced
from privgraph.schemas import load_model
from privgraph.spectral import spectral_release

pytestmark = [
    pytest.mark.slow,
    pytest.mark.skipif(os.environ.get("PRIVGRAPH_SLOW") != "1", reason="set PRIVGRAPH_SLOW=1 to run"),
]

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _run_config(name: str) -> dict:
    report = run_experiment(load_model(ExperimentConfig, CONFIGS / name))
    failures = [t for t in report["thresholds"] if not t["passed"]]
    assert not failures, failures
    return report


def test_release_ledgers_total_the_advertised_budget():
    rng = np.random.default_rng(8)
    G = random_graph(12, 20, rng, law="uniform", scale=3.0)
    ledger = BudgetLedger()
    spectral_release(G, 0.7, 0.1, rng, ledger)
    assert ledger.total() == PrivacyBudget(4 * 0.7, 0.0)

    ledger = BudgetLedger()
    cut_release(G, 0.7, 1e-5, rng, config=MirrorDescentConfig(iterations=20), ledger=ledger)
    total = ledger.total()
    assert total.epsilon == pytest.approx(5 * 0.7, abs=1e-12)
    assert total.delta == pytest.approx(1e-5, abs=1e-18)


def test_advanced_composition_on_random_inputs():
    rng = np.random.default_rng(9)
    for _ in range(100):
        eps = float(rng.uniform(1e-3, 1.0))
        delta = float(rng.uniform(0.0, 1e-4))
        k = int(rng.integers(1, 500))
        delta_prime = float(rng.uniform(1e-9, 1e-3))
        got = compose_advanced(eps, delta, k, delta_prime)
        expected = math.sqrt(2 * k * math.log(1 / delta_prime)) * eps + k * eps * (math.exp(eps) - 1)
        assert abs(got.epsilon - expected) <= 1e-12 * max(1.0, expected)
        assert abs(got.delta - (k * delta + delta_prime)) <= 1e-12


def test_spectral_error_grows_slowly_in_n():
    # the n=400 cell materializes a table of roughly 1e8 entries
    _run_config("spectral_scaling.json")


def test_spectral_error_and_degree_track_max_degree():
    report = _run_config("spectral_degree.json")
    growth = [t for t in report["thresholds"] if t["metric"] == "degree_growth"]
    assert len(growth) == 1 and len(growth[0]["observed"]) == 2


def test_heavy_edges_are_retained_with_small_per_edge_error():
    report = _run_config("spectral_heavy_edges.json")
    retention = report["cells"][0]["mechanisms"]["spectral"]["metrics"]["heavy_retention"]["values"]
    assert len(retention) == 1000


def test_cut_error_under_pilot_ceiling():
    report = _run_config("cut_utility.json")
    values = report["cells"][0]["mechanisms"]["cut"]["metrics"]["max_cut_error"]["values"]
    assert len(values) == 100
    assert report["config"]["thresholds"][0]["max"] == pytest.approx(14.22)


def test_residual_is_light_and_heavy_part_error_is_bounded():
    _run_config("cut_heavy_part.json")


def test_cut_error_does_not_follow_weight_scale():
    _run_config("cut_weight_independence.json")


def test_cut_release_beats_naive_noise():
    _run_config("naive_comparison.json")
