"""
Brute-force and Monte-Carlo oracles used to check the mechanisms.
"""
from __future__ import annotations

import logging
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.stats import chisquare

from .errors import CapacityError, ConvergenceError, DomainError
from .graph import CutQuery, Graph, adjacency, is_connected, spectral_norm_diff
from .sampler import BernoulliProfile, enumerate_conditional, sample_conditional

logger = logging.getLogger(__name__)

MAX_TERNARY_VERTICES = 13
MAX_PAIR_VERTICES = 8
MAX_DISTRIBUTION_SLOTS = 20
_CHUNK = 1 << 16


def _difference(G: Graph, H: Graph) -> np.ndarray:
    if G.n != H.n:
        raise DomainError(f"vertex counts differ: {G.n} vs {H.n}")
    return adjacency(G) - adjacency(H)


def brute_force_max_cut_error(G: Graph, H: Graph) -> Tuple[float, CutQuery]:
    """
    max over disjoint (S, T) of |Phi_G(S,T) - Phi_H(S,T)|, by enumerating all 3^n
    assignments (digit 0 neither, 1 in S, 2 in T; vertex 0 is the most
    significant digit). Ties go to the first assignment in that order.
    """
    n = G.n
    if n > MAX_TERNARY_VERTICES:
        raise CapacityError(f"3^n cut enumeration capped at n={MAX_TERNARY_VERTICES}, got n={n}")
    D = _difference(G, H)
    total = 3 ** n
    powers = 3 ** np.arange(n - 1, -1, -1, dtype=np.int64)
    best_err = -1.0
    best_code = 0
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        digits = (codes[:, None] // powers[None, :]) % 3
        S = (digits == 1).astype(np.float64)
        T = (digits == 2).astype(np.float64)
        errs = np.abs(np.einsum("ij,ij->i", S @ D, T))
        i = int(np.argmax(errs))
        if errs[i] > best_err:
            best_err = float(errs[i])
            best_code = int(codes[i])
    digits = [(best_code // (3 ** (n - 1 - j))) % 3 for j in range(n)]
    witness = CutQuery(
        S=frozenset(j for j, d in enumerate(digits) if d == 1),
        T=frozenset(j for j, d in enumerate(digits) if d == 2),
    )
    return max(best_err, 0.0), witness


def brute_force_max_cut_error_pairs(G: Graph, H: Graph) -> float:
    """Independent check: all 2^n x 2^n subset pairs, disjoint ones kept."""
    n = G.n
    if n > MAX_PAIR_VERTICES:
        raise CapacityError(f"2^n x 2^n cut enumeration capped at n={MAX_PAIR_VERTICES}, got n={n}")
    D = _difference(G, H)
    masks = np.arange(1 << n, dtype=np.int64)
    M = ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(np.float64)
    values = M @ D @ M.T
    disjoint = (masks[:, None] & masks[None, :]) == 0
    return float(np.abs(values[disjoint]).max())


def spectral_error(G: Graph, H: Graph, rng: Optional[np.random.Generator] = None) -> float:
    """spectral_norm_diff, falling back to the best estimate on non-convergence."""
    try:
        return spectral_norm_diff(G, H, rng=rng)
    except ConvergenceError as exc:
        logger.warning("power iteration did not converge; using best estimate %.6g", exc.best_estimate)
        return float(exc.best_estimate)


def _transition_cdf(G: Graph) -> np.ndarray:
    if G.n < 2 or not is_connected(G):
        raise DomainError("random-walk simulation needs a connected graph on at least 2 vertices")
    A = np.clip(adjacency(G), 0.0, None)
    P = A / A.sum(axis=1, keepdims=True)
    cdf = np.cumsum(P, axis=1)
    cdf[:, -1] = 1.0
    return cdf


def _step(cdf: np.ndarray, pos: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(pos.size)
    return (cdf[pos] <= u[:, None]).sum(axis=1)


def _summarize(steps: np.ndarray) -> Tuple[float, float]:
    mean = float(steps.mean())
    stderr = float(steps.std(ddof=1) / np.sqrt(steps.size)) if steps.size > 1 else 0.0
    return mean, stderr


def simulate_hitting_time(
    G: Graph,
    start: int,
    target: int,
    walks: int,
    rng: np.random.Generator,
    max_steps: int = 10_000_000,
) -> Tuple[float, float]:
    """Mean and standard error of the steps a random walk from start needs to reach target."""
    cdf = _transition_cdf(G)
    pos = np.full(walks, start, dtype=np.int64)
    steps = np.zeros(walks, dtype=np.int64)
    active = pos != target
    for _ in range(max_steps):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        pos[idx] = _step(cdf, pos[idx], rng)
        steps[idx] += 1
        active[idx] = pos[idx] != target
    else:
        raise ConvergenceError(f"walks did not all reach {target} within {max_steps} steps")
    return _summarize(steps)


def simulate_cover_time(
    G: Graph,
    start: int,
    walks: int,
    rng: np.random.Generator,
    max_steps: int = 10_000_000,
) -> Tuple[float, float]:
    """Mean and standard error of the steps a walk from start needs to visit every vertex."""
    cdf = _transition_cdf(G)
    n = G.n
    pos = np.full(walks, start, dtype=np.int64)
    visited = np.zeros((walks, n), dtype=bool)
    visited[:, start] = True
    remaining = np.full(walks, n - 1, dtype=np.int64)
    steps = np.zeros(walks, dtype=np.int64)
    for _ in range(max_steps):
        idx = np.flatnonzero(remaining > 0)
        if idx.size == 0:
            break
        nxt = _step(cdf, pos[idx], rng)
        pos[idx] = nxt
        steps[idx] += 1
        fresh = ~visited[idx, nxt]
        visited[idx, nxt] = True
        remaining[idx] -= fresh
    else:
        raise ConvergenceError(f"walks did not cover the graph within {max_steps} steps")
    return _summarize(steps)


Sampler = Callable[..., np.ndarray]


def sampler_distribution_test(
    profile: BernoulliProfile,
    k: int,
    draws: int,
    rng: np.random.Generator,
    sampler: Sampler = sample_conditional,
) -> Tuple[float, float]:
    """
    Total-variation distance and chi-square p-value of `draws` samples against
    the enumerated conditional law. Any draw outside the support forces p = 0.
    `sampler` is called as sampler(profile, k, rng, size=draws).
    """
    N = len(profile)
    if N > MAX_DISTRIBUTION_SLOTS:
        raise CapacityError(f"distribution test capped at N={MAX_DISTRIBUTION_SLOTS}, got N={N}")
    law = enumerate_conditional(profile, k)
    weights = 1 << np.arange(N - 1, -1, -1, dtype=np.int64)
    support_codes = np.array([int(np.dot(key, weights)) for key in law], dtype=np.int64)
    probs = np.array(list(law.values()), dtype=np.float64)
    positive = probs > 0
    support_codes = support_codes[positive]
    probs = probs[positive] / probs[positive].sum()

    samples = np.asarray(sampler(profile, k, rng, size=draws)).reshape(draws, N).astype(np.int64)
    codes = samples @ weights
    order = np.argsort(support_codes)
    sorted_codes = support_codes[order]
    slot = np.searchsorted(sorted_codes, codes)
    slot_clipped = np.minimum(slot, sorted_codes.size - 1)
    inside = (sorted_codes[slot_clipped] == codes) & (samples.sum(axis=1) == k)
    outside = int((~inside).sum())

    counts_sorted = np.bincount(slot_clipped[inside], minlength=sorted_codes.size)
    observed = np.empty_like(counts_sorted)
    observed[order] = counts_sorted
    tv = 0.5 * (np.abs(observed / draws - probs).sum() + outside / draws)
    if outside:
        return float(tv), 0.0
    if probs.size == 1:
        return float(tv), 1.0
    _, pvalue = chisquare(observed, f_exp=probs * draws)
    return float(tv), float(pvalue)
