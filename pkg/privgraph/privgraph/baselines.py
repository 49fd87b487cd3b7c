"""Plain Laplace-mechanism comparison points for the releases."""
from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from .analytics import resistance_matrix
from .errors import DomainError
from .graph import Graph, num_slots, spectral_gap
from .privacy import BudgetLedger, laplace_noise, per_fold_epsilon, require_positive_epsilon

logger = logging.getLogger(__name__)

# ||L_G - L_G'||_2 for neighbours differing by at most 1 on one edge.
NEIGHBOR_LAPLACIAN_SHIFT = 2.0


def naive_cut_baseline(
    G: Graph, epsilon: float, rng: np.random.Generator, ledger: Optional[BudgetLedger] = None
) -> Graph:
    """Add Lap(1/epsilon) to every one of the N slots; charge (epsilon, 0)."""
    epsilon = require_positive_epsilon(epsilon)
    noisy = G.to_vector() + laplace_noise(1.0 / epsilon, rng, size=num_slots(G.n))
    if ledger is not None:
        ledger.charge("naive_cut_baseline", epsilon)
    return Graph.from_vector(G.n, noisy, keep=np.arange(num_slots(G.n)), signed=True)


def resistance_sensitivity_bound(G: Graph) -> float:
    """
    Per-pair sensitivity of R(u, v) from the pseudoinverse perturbation bound
    ||L^+ - L'^+|| <= zeta u^2 / (1 - zeta u), u = 1/lambda(G), times ||b||^2 = 2.
    """
    gap = spectral_gap(G)
    if gap <= NEIGHBOR_LAPLACIAN_SHIFT:
        raise DomainError(
            f"perturbation bound needs spectral gap above {NEIGHBOR_LAPLACIAN_SHIFT}, got {gap:.6g}"
        )
    u = 1.0 / gap
    zeta = NEIGHBOR_LAPLACIAN_SHIFT
    return 2.0 * zeta * u * u / (1.0 - zeta * u)


def laplace_resistance_baseline(
    G: Graph,
    epsilon: float,
    delta: float,
    rng: np.random.Generator,
    ledger: Optional[BudgetLedger] = None,
) -> np.ndarray:
    """
    Independent Laplace noise on every pairwise resistance, each pair at the
    per-fold epsilon that composes (advanced, delta' = delta) to epsilon over
    all N pairs. The sensitivity depends on lambda(G) itself, which this
    comparison point takes as public.
    """
    epsilon = require_positive_epsilon(epsilon)
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    n = G.n
    R = resistance_matrix(G)
    pairs = num_slots(n)
    if pairs == 0:
        return R
    sensitivity = resistance_sensitivity_bound(G)
    eps_pair = per_fold_epsilon(epsilon, pairs, delta)
    iu, ju = np.triu_indices(n, k=1)
    noisy = R.copy()
    noisy[iu, ju] += laplace_noise(sensitivity / eps_pair, rng, size=pairs)
    noisy[ju, iu] = noisy[iu, ju]
    if ledger is not None:
        ledger.charge("laplace_resistance_baseline", epsilon, delta)
    logger.debug("resistance baseline: sensitivity=%.4g eps_pair=%.4g", sensitivity, eps_pair)
    return noisy
