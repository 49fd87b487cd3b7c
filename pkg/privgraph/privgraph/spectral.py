"""Pure-DP spectral approximation release built on the topology sampler."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .graph import Graph, num_slots
from .privacy import (
    BudgetLedger,
    PrivacyBudget,
    laplace_noise,
    require_positive_epsilon,
    topology_sample,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectralRelease:
    graph: Graph
    m: int
    m_hat: int
    epsilon: float
    beta: float
    ledger: BudgetLedger
    seed: Optional[int] = None

    @property
    def budget(self) -> PrivacyBudget:
        return self.ledger.total()


def edge_count_from_noise(m: int, N: int, epsilon: float, beta: float, noise: float) -> int:
    """min(N, ceil(m + noise + ln(1/beta)/epsilon)), floored at 0."""
    raw = math.ceil(m + noise + math.log(1.0 / beta) / epsilon)
    return int(min(N, max(0, raw)))


def perturbed_edge_count(
    m: int,
    N: int,
    epsilon: float,
    beta: float,
    rng: np.random.Generator,
    ledger: Optional[BudgetLedger] = None,
) -> int:
    """Upward-biased private edge count: at least m with probability >= 1 - beta."""
    epsilon = require_positive_epsilon(epsilon)
    if not 0 <= m <= N:
        raise DomainError(f"edge count m={m} outside [0, {N}]")
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    noise = laplace_noise(1.0 / epsilon, rng)
    if ledger is not None:
        ledger.charge("edge_count", epsilon)
    return edge_count_from_noise(m, N, epsilon, beta, noise)


def spectral_release(
    G: Graph,
    epsilon: float,
    beta: float,
    rng: np.random.Generator,
    ledger: Optional[BudgetLedger] = None,
    seed: Optional[int] = None,
) -> SpectralRelease:
    """
    Release G-hat with m-hat slots chosen by the topology sampler and weights
    max(0, w_e + Lap(1/epsilon)). Total charge (4*epsilon, 0). Selected slots
    whose weight clamps to 0 stay stored as explicit zeros.
    """
    epsilon = require_positive_epsilon(epsilon)
    if not 0.0 < beta < 0.5:
        raise DomainError(f"beta must lie in (0, 1/2), got {beta}")
    if G.signed and any(w < 0 for w in G.weights.values()):
        raise DomainError("spectral release needs non-negative weights")

    local = BudgetLedger()
    N = num_slots(G.n)
    m = G.nnz
    m_hat = perturbed_edge_count(m, N, epsilon, beta, rng, local)
    ids = topology_sample(G, m_hat, epsilon, rng, local)
    noise = laplace_noise(1.0 / epsilon, rng, size=ids.size)
    local.charge("edge_weights", epsilon)

    w = G.to_vector()
    released = np.maximum(0.0, w[ids] + noise)
    graph = Graph(n=G.n, weights=dict(zip(ids.tolist(), released.tolist())))
    logger.debug("spectral release: n=%d m=%d m_hat=%d", G.n, m, m_hat)
    if ledger is not None:
        ledger.extend(local)
    return SpectralRelease(
        graph=graph, m=m, m_hat=m_hat, epsilon=epsilon, beta=beta, ledger=local, seed=seed
    )
