"""Random graph families for tests and experiments."""
from __future__ import annotations

from typing import Literal, Optional

import numpy as np

from .errors import DomainError
from .graph import Graph, _pair_index, edge_id, num_slots

WeightLaw = Literal["constant", "uniform", "heavy"]
WEIGHT_LAWS = ("constant", "uniform", "heavy")


def draw_weights(
    law: str, size: int, rng: np.random.Generator, scale: float = 1.0, heavy_prob: float = 0.1
) -> np.ndarray:
    """
    constant: every weight is `scale`; uniform: (0, scale];
    heavy: scale * Bernoulli(heavy_prob) + uniform (0, 1].
    """
    if scale <= 0:
        raise DomainError(f"weight scale must be positive, got {scale}")
    if law == "constant":
        return np.full(size, float(scale))
    if law == "uniform":
        return scale * (1.0 - rng.random(size))
    if law == "heavy":
        return scale * (rng.random(size) < heavy_prob) + (1.0 - rng.random(size))
    raise DomainError(f"unknown weight law {law!r}; expected one of {WEIGHT_LAWS}")


def random_graph(
    n: int,
    m: int,
    rng: np.random.Generator,
    law: str = "constant",
    scale: float = 1.0,
    heavy_prob: float = 0.1,
) -> Graph:
    """m distinct slots chosen uniformly, weights from `law`."""
    N = num_slots(n)
    if not 0 <= m <= N:
        raise DomainError(f"edge count m={m} outside [0, {N}]")
    ids = np.sort(rng.choice(N, size=m, replace=False))
    weights = draw_weights(law, m, rng, scale, heavy_prob)
    return Graph(n=n, weights=dict(zip(ids.tolist(), weights.tolist())))


def degree_capped_graph(
    n: int,
    max_degree: int,
    rng: np.random.Generator,
    m: Optional[int] = None,
    law: str = "constant",
    scale: float = 1.0,
    heavy_prob: float = 0.1,
) -> Graph:
    """
    Scan slots in random order and keep an edge only while both endpoints have
    degree below max_degree, stopping at m edges (default n * max_degree / 2).
    """
    if max_degree < 0:
        raise DomainError(f"max_degree must be non-negative, got {max_degree}")
    target = n * max_degree // 2 if m is None else m
    N = num_slots(n)
    if not 0 <= target <= N:
        raise DomainError(f"edge count {target} outside [0, {N}]")
    us, vs = _pair_index(n)
    degree = np.zeros(n, dtype=np.int64)
    chosen = []
    for e in rng.permutation(N):
        if len(chosen) >= target:
            break
        u, v = us[e], vs[e]
        if degree[u] < max_degree and degree[v] < max_degree:
            degree[u] += 1
            degree[v] += 1
            chosen.append(int(e))
    chosen.sort()
    weights = draw_weights(law, len(chosen), rng, scale, heavy_prob)
    return Graph(n=n, weights=dict(zip(chosen, weights.tolist())))


def random_connected_graph(
    n: int,
    extra_edges: int,
    rng: np.random.Generator,
    law: str = "constant",
    scale: float = 1.0,
    heavy_prob: float = 0.1,
) -> Graph:
    """A random spanning tree plus `extra_edges` further slots (capped at N)."""
    if n < 1:
        raise DomainError(f"need at least one vertex, got {n}")
    order = rng.permutation(n)
    tree = set()
    for i in range(1, n):
        parent = order[rng.integers(0, i)]
        tree.add(edge_id(int(order[i]), int(parent), n))
    rest = np.setdiff1d(np.arange(num_slots(n)), np.fromiter(tree, dtype=np.int64, count=len(tree)))
    extra = min(extra_edges, rest.size)
    ids = sorted(tree | set(rng.choice(rest, size=extra, replace=False).tolist()))
    weights = draw_weights(law, len(ids), rng, scale, heavy_prob)
    return Graph(n=n, weights=dict(zip(ids, weights.tolist())))
