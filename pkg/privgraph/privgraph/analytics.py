"""
Laplacian pseudoinverse and random-walk statistics, exact and private.

The private estimators post-process one spectral release at epsilon/8 (total
charge epsilon/2), repaired by overlaying a complete graph of weight 1/n when
disconnected, and spend the other epsilon/2 on the statistic they need
(total weight or degree vector).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from .errors import ConvergenceError, DomainError
from .graph import (
    Graph,
    graph_sum,
    is_connected,
    laplacian,
    max_unweighted_degree,
    nonzero_threshold,
    spectral_gap,
    weighted_degrees,
)
from .privacy import BudgetLedger, laplace_noise, require_positive_epsilon
from .spectral import SpectralRelease, spectral_release

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


@dataclass(frozen=True)
class Pseudoinverse:
    matrix: np.ndarray
    rank: int
    zero_threshold: float


@dataclass(frozen=True)
class HittingVector:
    """Expected hitting times h[u] from every start u to the target."""
    target: int
    values: np.ndarray


@dataclass(frozen=True)
class PrivateCommuteTimes:
    values: Dict[Pair, float]
    matrix: np.ndarray
    total_weight_estimate: float
    release: SpectralRelease
    repaired: bool
    ledger: BudgetLedger


@dataclass(frozen=True)
class CoverTimeEstimate:
    estimate: float
    lower: float
    upper: float
    commute: PrivateCommuteTimes


@dataclass(frozen=True)
class PrivateHittingTimes:
    vectors: Dict[int, HittingVector]
    release: SpectralRelease
    repaired: bool
    ledger: BudgetLedger


def pseudoinverse(L: np.ndarray) -> Pseudoinverse:
    """Moore-Penrose inverse of a symmetric matrix by full eigendecomposition."""
    L = np.asarray(L, dtype=np.float64)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {L.shape}")
    if not np.allclose(L, L.T, rtol=0.0, atol=1e-12 * (1.0 + np.abs(L).max(initial=0.0))):
        raise DomainError("pseudoinverse expects a symmetric matrix")
    if L.size == 0:
        return Pseudoinverse(matrix=L.copy(), rank=0, zero_threshold=0.0)
    try:
        eig, vecs = np.linalg.eigh(L)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigendecomposition failed: {exc}") from exc
    thr = nonzero_threshold(eig)
    keep = np.abs(eig) > thr
    inv = np.zeros_like(eig)
    inv[keep] = 1.0 / eig[keep]
    P = (vecs * inv) @ vecs.T
    P = 0.5 * (P + P.T)
    return Pseudoinverse(matrix=P, rank=int(keep.sum()), zero_threshold=thr)


def _require_connected(G: Graph) -> None:
    if not is_connected(G):
        raise DomainError("graph must be connected")


def _resistances_from(P: np.ndarray) -> np.ndarray:
    d = np.diag(P)
    R = d[:, None] + d[None, :] - 2.0 * P
    np.fill_diagonal(R, 0.0)
    return np.maximum(R, 0.0)


def effective_resistance(G: Graph, u: int, v: int) -> float:
    """b^T L^+ b with b = e_u - e_v."""
    if u == v:
        raise DomainError("effective resistance needs two distinct vertices")
    if not (0 <= u < G.n and 0 <= v < G.n):
        raise DomainError(f"vertex out of range for n={G.n}: ({u}, {v})")
    _require_connected(G)
    P = pseudoinverse(laplacian(G)).matrix
    return float(P[u, u] + P[v, v] - 2.0 * P[u, v])


def resistance_matrix(G: Graph) -> np.ndarray:
    _require_connected(G)
    return _resistances_from(pseudoinverse(laplacian(G)).matrix)


def resistance_sensitivity_demo(n: int) -> float:
    """|R(0,1)| change when edge {0,1} is removed from the unit complete graph K_n."""
    if n < 4:
        raise DomainError(f"sensitivity witness needs n >= 4, got {n}")
    full = Graph.complete(n)
    weights = dict(full.weights)
    del weights[0]  # slot of {0, 1}
    removed = Graph(n=n, weights=weights)
    return abs(effective_resistance(removed, 0, 1) - effective_resistance(full, 0, 1))


def commute_times_exact(G: Graph) -> np.ndarray:
    """C[u, v] = 2 ||w||_1 R(u, v)."""
    return 2.0 * G.total_weight * resistance_matrix(G)


def overlay_complete(G: Graph, weight: Optional[float] = None) -> Graph:
    if weight is None:
        weight = 1.0 / G.n
    return graph_sum(G, Graph.complete(G.n, weight))


def _warn_if_ill_conditioned(G: Graph, epsilon: float) -> None:
    n = G.n
    if n < 2:
        return
    gap = spectral_gap(G)
    ratio = max_unweighted_degree(G) * math.log(n) ** 2 / (epsilon * gap) if gap > 0 else math.inf
    if ratio >= 0.5:
        logger.warning(
            "spectral gap too small for the estimator's guarantee (Delta log^2 n / (eps lambda) = %.3g)",
            ratio,
        )


def _repaired_release(
    G: Graph, epsilon: float, beta: float, rng: np.random.Generator, ledger: BudgetLedger
) -> Tuple[SpectralRelease, Graph, bool]:
    release = spectral_release(G, epsilon / 8.0, beta, rng, ledger)
    graph = release.graph
    repaired = not is_connected(graph)
    if repaired:
        logger.warning("released graph is disconnected; overlaying K_n with weight 1/n")
        graph = overlay_complete(graph)
    return release, graph, repaired


def _pairs(matrix: np.ndarray) -> Dict[Pair, float]:
    n = matrix.shape[0]
    return {(u, v): float(matrix[u, v]) for u in range(n) for v in range(u + 1, n)}


def private_commute_times(
    G: Graph,
    epsilon: float,
    beta: float,
    rng: np.random.Generator,
    ledger: Optional[BudgetLedger] = None,
) -> PrivateCommuteTimes:
    """C-hat[u, v] = W-hat * R_{G-hat}(u, v), W-hat = ||w||_1 + Lap(2/eps)."""
    epsilon = require_positive_epsilon(epsilon)
    _require_connected(G)
    _warn_if_ill_conditioned(G, epsilon)
    local = BudgetLedger()
    release, graph, repaired = _repaired_release(G, epsilon, beta, rng, local)
    w_hat = G.total_weight + laplace_noise(2.0 / epsilon, rng)
    local.charge("total_weight", epsilon / 2.0)
    C = w_hat * _resistances_from(pseudoinverse(laplacian(graph)).matrix)
    if ledger is not None:
        ledger.extend(local)
    return PrivateCommuteTimes(
        values=_pairs(C),
        matrix=C,
        total_weight_estimate=w_hat,
        release=release,
        repaired=repaired,
        ledger=local,
    )


def cover_time_bounds(commute: Mapping[Pair, float]) -> Tuple[float, float]:
    """Matthews bracket: max C / 2 <= cover time <= max C * (1 + ln n)."""
    if not commute:
        raise DomainError("cover time bounds need at least one commute time")
    vertices = {x for pair in commute for x in pair}
    top = max(commute.values())
    return top / 2.0, top * (1.0 + math.log(len(vertices)))


def private_cover_time(
    G: Graph,
    epsilon: float,
    beta: float,
    rng: np.random.Generator,
    ledger: Optional[BudgetLedger] = None,
) -> CoverTimeEstimate:
    commute = private_commute_times(G, epsilon, beta, rng, ledger)
    lower, upper = cover_time_bounds(commute.values)
    return CoverTimeEstimate(estimate=max(commute.values.values()), lower=lower, upper=upper, commute=commute)


def _target_demands(degrees: np.ndarray) -> np.ndarray:
    """Column t is d with entry t replaced by d_t - sum(d)."""
    n = degrees.size
    D = np.repeat(degrees[:, None], n, axis=1)
    D[np.arange(n), np.arange(n)] -= degrees.sum()
    return D


def _hitting_from(P: np.ndarray, demands: np.ndarray) -> np.ndarray:
    H = P @ demands
    H -= np.diag(H)[None, :]
    return H


def hitting_times_exact(G: Graph, t: int) -> HittingVector:
    """Solve L h = d^t through the pseudoinverse and shift so h[t] = 0."""
    if not 0 <= t < G.n:
        raise DomainError(f"target {t} out of range for n={G.n}")
    _require_connected(G)
    P = pseudoinverse(laplacian(G)).matrix
    d = weighted_degrees(G)
    demand = d.copy()
    demand[t] -= d.sum()
    h = P @ demand
    h = h - h[t]
    return HittingVector(target=t, values=h)


def hitting_times_tetali(G: Graph) -> np.ndarray:
    """
    All ordered hitting times from resistances: H[u, v] is the expected time
    from u to v, ||w||_1 R(u,v) + sum_i d(i)/2 (R(v,i) - R(i,u)).
    """
    R = resistance_matrix(G)
    return _tetali(R, weighted_degrees(G), G.total_weight)


def _tetali(R: np.ndarray, degrees: np.ndarray, total: float) -> np.ndarray:
    s = R @ degrees / 2.0
    H = total * R + s[None, :] - s[:, None]
    np.fill_diagonal(H, 0.0)
    return H


def private_hitting_times(
    G: Graph,
    epsilon: float,
    beta: float,
    rng: np.random.Generator,
    ledger: Optional[BudgetLedger] = None,
) -> PrivateHittingTimes:
    """
    One degree perturbation z ~ Lap(4/eps)^n serves every target. Entries of
    the perturbed degree vector may be negative.
    """
    epsilon = require_positive_epsilon(epsilon)
    _require_connected(G)
    _warn_if_ill_conditioned(G, epsilon)
    local = BudgetLedger()
    release, graph, repaired = _repaired_release(G, epsilon, beta, rng, local)
    d_hat = weighted_degrees(G) + laplace_noise(4.0 / epsilon, rng, size=G.n)
    local.charge("degrees", epsilon / 2.0)
    H = _hitting_from(pseudoinverse(laplacian(graph)).matrix, _target_demands(d_hat))
    if ledger is not None:
        ledger.extend(local)
    vectors = {t: HittingVector(target=t, values=H[:, t].copy()) for t in range(G.n)}
    return PrivateHittingTimes(vectors=vectors, release=release, repaired=repaired, ledger=local)


def private_hitting_times_tetali(
    G: Graph,
    epsilon: float,
    beta: float,
    rng: np.random.Generator,
    ledger: Optional[BudgetLedger] = None,
) -> PrivateHittingTimes:
    """Tetali's formula on the repaired release alone; charge epsilon/2."""
    epsilon = require_positive_epsilon(epsilon)
    _require_connected(G)
    _warn_if_ill_conditioned(G, epsilon)
    local = BudgetLedger()
    release, graph, repaired = _repaired_release(G, epsilon, beta, rng, local)
    R = _resistances_from(pseudoinverse(laplacian(graph)).matrix)
    H = _tetali(R, weighted_degrees(graph), graph.total_weight)
    if ledger is not None:
        ledger.extend(local)
    vectors = {t: HittingVector(target=t, values=H[:, t].copy()) for t in range(G.n)}
    return PrivateHittingTimes(vectors=vectors, release=release, repaired=repaired, ledger=local)
