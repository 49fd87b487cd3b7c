"""
Approximate-DP cut release: a topology-sampled heavy part with unclamped
Laplace weights, plus a mirror-descent synthesis of the residual light edges.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .graph import Graph, graph_sum, num_slots
from .mirror_descent import MirrorDescentConfig, MirrorDescentPlan, mirror_descent_synthesize
from .privacy import BudgetLedger, PrivacyBudget, laplace_noise, require_positive_epsilon, topology_sample
from .spectral import perturbed_edge_count

__all__ = ["CutRelease", "cut_release", "default_cut_beta", "graph_sum"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CutRelease:
    graph: Graph  # heavy_part + light_part
    heavy_part: Graph
    light_part: Graph
    m: int
    m_hat: int
    epsilon: float
    delta: float
    beta: float
    ledger: BudgetLedger
    plan: MirrorDescentPlan
    mass_estimate: float
    # Diagnostics about the private input; reported in metadata, not part of the release.
    residual_max_weight: float
    residual_edges: int
    seed: Optional[int] = None

    @property
    def budget(self) -> PrivacyBudget:
        return self.ledger.total()


def default_cut_beta(n: int) -> float:
    """1/(ln n)^(1/4); 1/2 where that exceeds one (n < 3)."""
    if n < 3:
        return 0.5
    return 1.0 / math.log(n) ** 0.25


def cut_release(
    G: Graph,
    epsilon: float,
    delta: float,
    rng: np.random.Generator,
    beta: Optional[float] = None,
    config: Optional[MirrorDescentConfig] = None,
    ledger: Optional[BudgetLedger] = None,
    seed: Optional[int] = None,
) -> CutRelease:
    """Release G-hat = G1-hat + G2-hat under a total charge of (5*epsilon, delta)."""
    epsilon = require_positive_epsilon(epsilon)
    if not 0.0 < delta < 0.5:
        raise DomainError(f"delta must lie in (0, 1/2), got {delta}")
    if G.signed and any(w < 0 for w in G.weights.values()):
        raise DomainError("cut release needs non-negative weights")
    if beta is None:
        beta = default_cut_beta(G.n)
    if config is None:
        config = MirrorDescentConfig()

    local = BudgetLedger()
    N = num_slots(G.n)
    m = G.nnz
    m_hat = perturbed_edge_count(m, N, epsilon, beta, rng, local)
    ids = topology_sample(G, m_hat, epsilon, rng, local)
    noise = laplace_noise(1.0 / epsilon, rng, size=ids.size)
    local.charge("heavy_weights", epsilon)

    w = G.to_vector()
    heavy = Graph(n=G.n, weights=dict(zip(ids.tolist(), (w[ids] + noise).tolist())), signed=True)

    selected = set(ids.tolist())
    residual = Graph(n=G.n, weights={e: x for e, x in G.weights.items() if e not in selected and x > 0})
    synthesis = mirror_descent_synthesize(residual, epsilon, delta, beta, config, rng, local)

    logger.debug(
        "cut release: n=%d m=%d m_hat=%d residual=%d", G.n, m, m_hat, residual.stored_count
    )
    if ledger is not None:
        ledger.extend(local)
    return CutRelease(
        graph=graph_sum(heavy, synthesis.graph),
        heavy_part=heavy,
        light_part=synthesis.graph,
        m=m,
        m_hat=m_hat,
        epsilon=epsilon,
        delta=delta,
        beta=beta,
        ledger=local,
        plan=synthesis.plan,
        mass_estimate=synthesis.mass_estimate,
        residual_max_weight=residual.max_weight,
        residual_edges=residual.stored_count,
        seed=seed,
    )
