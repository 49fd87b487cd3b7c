"""
Canonical weighted graph over the N = n(n-1)/2 lexicographic edge slots.

Slot ids follow the fixed convention u < v, id = u*n - u(u+1)/2 + (v - u - 1).
The same order is the sampling order of the topology sampler, so every module
shares one bijection between unordered pairs and slot ids.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

# Eigenvalues below this fraction of the largest eigenvalue count as zero.
ZERO_EIGENVALUE_RTOL = 1e-10


def num_slots(n: int) -> int:
    return n * (n - 1) // 2


def edge_id(u: int, v: int, n: int) -> int:
    """Canonical slot id of the unordered pair {u, v}; symmetric in (u, v)."""
    if u == v:
        raise DomainError(f"self-loop {{{u},{v}}} has no edge slot")
    if not (0 <= u < n and 0 <= v < n):
        raise DomainError(f"vertex out of range for n={n}: ({u}, {v})")
    if u > v:
        u, v = v, u
    return u * n - u * (u + 1) // 2 + (v - u - 1)


def edge_endpoints(e: int, n: int) -> Tuple[int, int]:
    """Inverse of edge_id: the pair (u, v), u < v, stored in slot e."""
    total = num_slots(n)
    if not 0 <= e < total:
        raise DomainError(f"edge id {e} out of range [0, {total})")
    # Largest u with first_id(u) <= e, from the quadratic first_id(u) = u*n - u(u+1)/2.
    u = int(n - 2 - math.floor(math.sqrt(-8 * e + 4 * n * (n - 1) - 7) / 2.0 - 0.5))
    first_id = lambda r: r * n - r * (r + 1) // 2  # noqa: E731
    while u > 0 and first_id(u) > e:
        u -= 1
    while first_id(u + 1) <= e:
        u += 1
    v = e - first_id(u) + u + 1
    return u, v


@lru_cache(maxsize=32)
def _pair_index(n: int) -> Tuple[np.ndarray, np.ndarray]:
    # np.triu_indices enumerates pairs row-major, which is exactly slot order.
    us, vs = np.triu_indices(n, k=1)
    us.setflags(write=False)
    vs.setflags(write=False)
    return us, vs


def slot_endpoints(ids: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized edge_endpoints for an array of slot ids."""
    us, vs = _pair_index(n)
    return us[ids], vs[ids]


@dataclass(frozen=True)
class Graph:
    """
    Weighted undirected graph on vertices 0..n-1.

    `weights` maps slot id -> weight; absent slots have weight 0. Explicitly
    stored zeros are allowed and count as topology (unweighted degree) but not
    toward nnz. Negative weights are only accepted on graphs built with
    signed=True (cut releases).
    """
    n: int
    weights: Mapping[int, float] = field(default_factory=dict)
    signed: bool = False

    def __post_init__(self) -> None:
        if self.n < 0:
            raise DomainError(f"vertex count must be non-negative, got {self.n}")
        total = num_slots(self.n)
        clean = {}
        for e, w in self.weights.items():
            e = int(e)
            w = float(w)
            if not 0 <= e < total:
                raise DomainError(f"edge id {e} out of range [0, {total}) for n={self.n}")
            if not math.isfinite(w):
                raise DomainError(f"non-finite weight on edge {e}")
            if w < 0 and not self.signed:
                raise DomainError(f"negative weight {w} on edge {e}")
            clean[e] = w
        object.__setattr__(self, "weights", MappingProxyType(dict(sorted(clean.items()))))

    # -- construction -----------------------------------------------------

    @classmethod
    def empty(cls, n: int) -> Graph:
        return cls(n=n)

    @classmethod
    def from_edges(
        cls, n: int, edges: Iterable[Tuple[int, int, float]], signed: bool = False
    ) -> Graph:
        weights = {}
        for u, v, w in edges:
            e = edge_id(int(u), int(v), n)
            if e in weights:
                raise DomainError(f"duplicate edge {{{u},{v}}}")
            weights[e] = float(w)
        return cls(n=n, weights=weights, signed=signed)

    @classmethod
    def from_vector(
        cls,
        n: int,
        vector: np.ndarray,
        keep: Optional[np.ndarray] = None,
        signed: bool = False,
    ) -> Graph:
        """
        Build from a dense slot vector. Nonzero slots are stored; `keep` is an
        optional array of slot ids stored even when their weight is zero.
        """
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (num_slots(n),):
            raise DomainError(f"weight vector must have length {num_slots(n)}, got {vector.shape}")
        stored = np.flatnonzero(vector)
        if keep is not None:
            stored = np.union1d(stored, np.asarray(keep, dtype=np.int64))
        return cls(n=n, weights=dict(zip(stored.tolist(), vector[stored].tolist())), signed=signed)

    @classmethod
    def complete(cls, n: int, weight: float = 1.0) -> Graph:
        return cls.from_vector(n, np.full(num_slots(n), float(weight)))

    # -- views ------------------------------------------------------------

    @property
    def num_slots(self) -> int:
        return num_slots(self.n)

    @property
    def stored_count(self) -> int:
        return len(self.weights)

    @property
    def nnz(self) -> int:
        """||w||_0: number of strictly positive weights."""
        return sum(1 for w in self.weights.values() if w > 0)

    @property
    def l1(self) -> float:
        return float(sum(abs(w) for w in self.weights.values()))

    @property
    def total_weight(self) -> float:
        return float(sum(self.weights.values()))

    @property
    def max_weight(self) -> float:
        return max((abs(w) for w in self.weights.values()), default=0.0)

    def slot_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        ids = np.fromiter(self.weights.keys(), dtype=np.int64, count=len(self.weights))
        ws = np.fromiter(self.weights.values(), dtype=np.float64, count=len(self.weights))
        return ids, ws

    def to_vector(self) -> np.ndarray:
        vec = np.zeros(self.num_slots, dtype=np.float64)
        ids, ws = self.slot_arrays()
        vec[ids] = ws
        return vec

    def edges(self) -> Iterator[Tuple[int, int, float]]:
        for e, w in self.weights.items():
            u, v = edge_endpoints(e, self.n)
            yield u, v, w

    def weight(self, u: int, v: int) -> float:
        return self.weights.get(edge_id(u, v, self.n), 0.0)

    def scaled(self, factor: float) -> Graph:
        return Graph(
            n=self.n,
            weights={e: w * factor for e, w in self.weights.items()},
            signed=self.signed or factor < 0,
        )


def graph_sum(g1: Graph, g2: Graph) -> Graph:
    """Coordinatewise weight sum; the stored topology is the union of both."""
    if g1.n != g2.n:
        raise DomainError(f"vertex counts differ: {g1.n} vs {g2.n}")
    weights = dict(g1.weights)
    for e, w in g2.weights.items():
        weights[e] = weights.get(e, 0.0) + w
    return Graph(n=g1.n, weights=weights, signed=g1.signed or g2.signed)


@dataclass(frozen=True)
class CutQuery:
    """A pair of disjoint vertex sets (S, T)."""
    S: frozenset
    T: frozenset

    def __post_init__(self) -> None:
        object.__setattr__(self, "S", frozenset(int(x) for x in self.S))
        object.__setattr__(self, "T", frozenset(int(x) for x in self.T))
        overlap = self.S & self.T
        if overlap:
            raise DomainError(f"cut sides overlap on vertices {sorted(overlap)}")

    @classmethod
    def complement(cls, S: Iterable[int], n: int) -> CutQuery:
        S = frozenset(S)
        return cls(S=S, T=frozenset(range(n)) - S)

    def indicator(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        for x in self.S | self.T:
            if not 0 <= x < n:
                raise DomainError(f"cut vertex {x} out of range for n={n}")
        s = np.zeros(n, dtype=np.float64)
        t = np.zeros(n, dtype=np.float64)
        s[list(self.S)] = 1.0
        t[list(self.T)] = 1.0
        return s, t


def weighted_degrees(G: Graph) -> np.ndarray:
    ids, ws = G.slot_arrays()
    us, vs = slot_endpoints(ids, G.n)
    return np.bincount(us, weights=ws, minlength=G.n) + np.bincount(vs, weights=ws, minlength=G.n)


def adjacency(G: Graph) -> np.ndarray:
    A = np.zeros((G.n, G.n), dtype=np.float64)
    ids, ws = G.slot_arrays()
    us, vs = slot_endpoints(ids, G.n)
    A[us, vs] = ws
    A[vs, us] = ws
    return A


def laplacian(G: Graph) -> np.ndarray:
    """Dense L = D - A."""
    L = -adjacency(G)
    np.fill_diagonal(L, -L.sum(axis=1))
    return L


def cut_value(G: Graph, q: CutQuery) -> float:
    """Phi_G(S, T): total weight of slots with one endpoint in S and the other in T."""
    s, t = q.indicator(G.n)
    ids, ws = G.slot_arrays()
    if ids.size == 0:
        return 0.0
    us, vs = slot_endpoints(ids, G.n)
    crossing = s[us] * t[vs] + s[vs] * t[us]
    return float(np.dot(crossing, ws))


def max_unweighted_degree(G: Graph) -> int:
    """Largest number of stored slots incident on one vertex (stored zeros count)."""
    if G.stored_count == 0:
        return 0
    ids, _ = G.slot_arrays()
    us, vs = slot_endpoints(ids, G.n)
    counts = np.bincount(us, minlength=G.n) + np.bincount(vs, minlength=G.n)
    return int(counts.max())


def is_connected(G: Graph) -> bool:
    """Connectivity over strictly positive weights."""
    if G.n <= 1:
        return True
    ids, ws = G.slot_arrays()
    positive = ws > 0
    us, vs = slot_endpoints(ids[positive], G.n)
    graph = coo_matrix((np.ones(us.size), (us, vs)), shape=(G.n, G.n))
    count, _ = connected_components(graph, directed=False)
    return count == 1


def nonzero_threshold(eigenvalues: np.ndarray) -> float:
    if eigenvalues.size == 0:
        return 0.0
    return ZERO_EIGENVALUE_RTOL * float(np.max(np.abs(eigenvalues)))


def spectral_gap(G: Graph) -> float:
    """
    Smallest Laplacian eigenvalue above the zero threshold. Equals lambda_2 on a
    connected graph; 0.0 when no eigenvalue clears the threshold.
    """
    if G.n < 2:
        return 0.0
    eig = np.linalg.eigvalsh(laplacian(G))
    thr = nonzero_threshold(eig)
    above = eig[eig > thr]
    return float(above.min()) if above.size else 0.0


def spectral_norm_diff(
    G1: Graph,
    G2: Graph,
    rng: Optional[np.random.Generator] = None,
    rtol: float = 1e-9,
    max_iter: Optional[int] = None,
) -> float:
    """
    ||L_G1 - L_G2||_2 by power iteration from a random start.

    Raises ConvergenceError (carrying the best estimate) when the relative
    change of the estimate has not dropped below `rtol` within the cap.
    """
    if G1.n != G2.n:
        raise DomainError(f"vertex counts differ: {G1.n} vs {G2.n}")
    M = laplacian(G1) - laplacian(G2)
    if not np.any(M):
        return 0.0
    if rng is None:
        rng = np.random.default_rng(0)
    n = G1.n
    cap = max_iter if max_iter is not None else 10 * n + 1000

    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    estimate = 0.0
    for it in range(cap):
        y = M @ x
        y_norm = float(np.linalg.norm(y))
        if y_norm == 0.0:
            # start landed in the null space
            x = rng.standard_normal(n)
            x /= np.linalg.norm(x)
            continue
        if it > 0 and abs(y_norm - estimate) <= rtol * y_norm:
            logger.debug("power iteration converged after %d steps", it + 1)
            return y_norm
        estimate = y_norm
        x = y / y_norm
    raise ConvergenceError(
        f"power iteration did not reach rtol={rtol} within {cap} steps",
        best_estimate=estimate,
    )


def max_weight_difference(G1: Graph, G2: Graph) -> float:
    """max over slots stored in either graph of |w1_e - w2_e|."""
    if G1.n != G2.n:
        raise DomainError(f"vertex counts differ: {G1.n} vs {G2.n}")
    slots = set(G1.weights) | set(G2.weights)
    return max((abs(G1.weights.get(e, 0.0) - G2.weights.get(e, 0.0)) for e in slots), default=0.0)
