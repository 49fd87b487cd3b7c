"""
Laplace noise, privacy-budget accounting, and the topology sampler.

The ledger is advisory: it records every charge a mechanism makes and reports
totals, it never refuses a charge.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from .errors import DomainError
from .graph import Graph, num_slots
from .sampler import BernoulliProfile, enumerate_conditional, sample_conditional

logger = logging.getLogger(__name__)

_BISECTION_STEPS = 200


@dataclass(frozen=True)
class PrivacyBudget:
    """An (epsilon, delta) pair. epsilon = 0 is the identity charge."""
    epsilon: float
    delta: float = 0.0

    def __post_init__(self) -> None:
        eps = float(self.epsilon)
        delta = float(self.delta)
        if not math.isfinite(eps) or eps < 0:
            raise DomainError(f"epsilon must be finite and non-negative, got {self.epsilon}")
        if not 0.0 <= delta < 1.0:
            raise DomainError(f"delta must lie in [0, 1), got {self.delta}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "delta", delta)

    def __add__(self, other: PrivacyBudget) -> PrivacyBudget:
        return compose_sequential([self, other])

    def as_record(self) -> Dict[str, float]:
        return {"epsilon": self.epsilon, "delta": self.delta}


def require_positive_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not math.isfinite(epsilon) or epsilon <= 0:
        raise DomainError(f"epsilon must be positive and finite, got {epsilon}")
    return epsilon


def compose_sequential(charges: Iterable[PrivacyBudget]) -> PrivacyBudget:
    """Basic composition: componentwise sums (exactly rounded, so order-free)."""
    charges = list(charges)
    return PrivacyBudget(
        epsilon=math.fsum(c.epsilon for c in charges),
        delta=math.fsum(c.delta for c in charges),
    )


def compose_advanced(epsilon: float, delta: float, k: int, delta_prime: float) -> PrivacyBudget:
    """
    k-fold adaptive composition of (epsilon, delta) mechanisms:
    eps' = sqrt(2k ln(1/delta')) * eps + k * eps * (e^eps - 1), delta_total = k*delta + delta'.
    """
    if not 0.0 < delta_prime < 1.0:
        raise DomainError(f"delta' must lie in (0, 1), got {delta_prime}")
    if k < 0:
        raise DomainError(f"fold count must be non-negative, got {k}")
    base = PrivacyBudget(epsilon, delta)
    if k == 0:
        return PrivacyBudget(0.0, delta_prime)
    eps = base.epsilon
    eps_total = math.sqrt(2.0 * k * math.log(1.0 / delta_prime)) * eps + k * eps * math.expm1(eps)
    delta_total = k * base.delta + delta_prime
    if delta_total >= 1.0:
        raise DomainError(f"composed delta {delta_total} is not below 1")
    return PrivacyBudget(eps_total, delta_total)


@dataclass
class BudgetLedger:
    """Ordered record of (label, budget) charges."""
    _charges: List[Tuple[str, PrivacyBudget]] = field(default_factory=list)

    @property
    def charges(self) -> Tuple[Tuple[str, PrivacyBudget], ...]:
        return tuple(self._charges)

    def charge(self, label: str, budget: Union[PrivacyBudget, float], delta: float = 0.0) -> PrivacyBudget:
        if not isinstance(budget, PrivacyBudget):
            budget = PrivacyBudget(budget, delta)
        self._charges.append((label, budget))
        logger.debug("charge %s: eps=%.6g delta=%.3g", label, budget.epsilon, budget.delta)
        return budget

    def extend(self, other: BudgetLedger, prefix: str = "") -> None:
        for label, budget in other.charges:
            self._charges.append((f"{prefix}{label}", budget))

    def total(self) -> PrivacyBudget:
        return compose_sequential(b for _, b in self._charges)

    def as_records(self) -> List[Dict[str, object]]:
        return [{"label": label, **budget.as_record()} for label, budget in self._charges]

    def __len__(self) -> int:
        return len(self._charges)


def _draw_uniform_open(rng: np.random.Generator, size: Optional[int]) -> Union[float, np.ndarray]:
    if size is None:
        u = rng.random()
        while u == 0.0:
            u = rng.random()
        return u
    u = rng.random(size)
    zero = u == 0.0
    while zero.any():
        u[zero] = rng.random(int(zero.sum()))
        zero = u == 0.0
    return u


def laplace_noise(scale: float, rng: np.random.Generator, size: Optional[int] = None):
    """Lap(0, scale) by inverse CDF: Z = -b * sign(u - 1/2) * ln(1 - 2|u - 1/2|)."""
    scale = float(scale)
    if not math.isfinite(scale) or scale <= 0:
        raise DomainError(f"Laplace scale must be positive and finite, got {scale}")
    u = _draw_uniform_open(rng, size)
    c = np.asarray(u) - 0.5
    z = -scale * np.sign(c) * np.log1p(-2.0 * np.abs(c))
    if size is None:
        return float(z)
    return z


def _topology_profile(G: Graph, epsilon: float) -> BernoulliProfile:
    epsilon = require_positive_epsilon(epsilon)
    vec = G.to_vector()
    if (vec < 0).any():
        raise DomainError("topology sampling needs non-negative weights")
    return BernoulliProfile.from_log_odds(epsilon * vec)


def topology_sample(
    G: Graph,
    k: int,
    epsilon: float,
    rng: np.random.Generator,
    ledger: Optional[BudgetLedger] = None,
) -> np.ndarray:
    """
    Sorted slot ids of a size-k subset S drawn with Pr[S] proportional to
    prod_{e in S} exp(epsilon * w_e), over all N slots (absent slots weigh 0).
    Charged as (2*epsilon, 0).
    """
    N = num_slots(G.n)
    if not 0 <= k <= N:
        raise DomainError(f"subset size k={k} outside [0, {N}]")
    epsilon = require_positive_epsilon(epsilon)
    if G.signed and any(w < 0 for w in G.weights.values()):
        raise DomainError("topology sampling needs non-negative weights")
    if ledger is not None:
        ledger.charge("topology_sample(2*eps)", 2.0 * epsilon)
    if k == 0:
        return np.zeros(0, dtype=np.int64)
    bits = sample_conditional(_topology_profile(G, epsilon), k, rng)
    return np.flatnonzero(bits).astype(np.int64)


def topology_distribution(G: Graph, k: int, epsilon: float, exact: bool = False) -> Dict[Tuple[int, ...], object]:
    """Exact law of topology_sample over all size-k slot subsets, by enumeration."""
    N = num_slots(G.n)
    if not 0 <= k <= N:
        raise DomainError(f"subset size k={k} outside [0, {N}]")
    profile = _topology_profile(G, epsilon)
    law = enumerate_conditional(profile, k, exact=exact)
    return {tuple(i for i, b in enumerate(bits) if b): pr for bits, pr in law.items()}


def per_fold_epsilon(target: float, k: int, delta_prime: float) -> float:
    """Largest per-fold epsilon whose k-fold advanced composition stays within target."""
    if k < 1 or not target > 0:
        raise DomainError(f"need k >= 1 and a positive target, got k={k}, target={target}")
    composed = lambda x: compose_advanced(x, 0.0, k, delta_prime).epsilon  # noqa: E731
    lo, hi = 0.0, float(target)
    while composed(hi) < target:
        hi *= 2.0
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if composed(mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo
