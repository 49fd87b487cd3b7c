"""
Exact sampling from independent Bernoulli variables conditioned on an exact
success count.

Coordinates are 0-based. Row i of a ConditionalTable holds the log-probability
that the suffix X_i..X_{N-1} has exactly q successes under the product measure;
row N is the empty suffix. Sampling walks the coordinates in order, drawing
each from its marginal conditioned on the count still to be placed, and sets
the last coordinate to the residual count.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, log_expit, logit, logsumexp

from .errors import CapacityError, DomainError, InvariantViolation

logger = logging.getLogger(__name__)

MAX_TABLE_ENTRIES = 2_000_000_000
MAX_ENUMERATION_SLOTS = 22

Configuration = Tuple[int, ...]


@dataclass(frozen=True)
class BernoulliProfile:
    """
    Success probabilities p_0..p_{N-1}, held as log-odds so that p can sit
    arbitrarily close to 1 without the complement rounding to zero.
    """
    log_odds: np.ndarray

    def __post_init__(self) -> None:
        x = np.array(self.log_odds, dtype=np.float64).reshape(-1)
        if x.size < 1:
            raise DomainError("a Bernoulli profile needs at least one coordinate")
        if np.isnan(x).any():
            raise DomainError("log-odds must not be NaN")
        if np.isposinf(x).any():
            raise DomainError("success probability 1 is not allowed; use a finite log-odds")
        x.setflags(write=False)
        object.__setattr__(self, "log_odds", x)

    @classmethod
    def from_probabilities(cls, p: Sequence[float]) -> BernoulliProfile:
        p = np.asarray(p, dtype=np.float64).reshape(-1)
        if np.isnan(p).any() or (p < 0).any() or (p >= 1).any():
            raise DomainError("probabilities must lie in [0, 1)")
        with np.errstate(divide="ignore"):
            return cls(log_odds=logit(p))

    @classmethod
    def from_log_odds(cls, x: Sequence[float]) -> BernoulliProfile:
        return cls(log_odds=np.asarray(x, dtype=np.float64))

    def __len__(self) -> int:
        return int(self.log_odds.size)

    @property
    def probabilities(self) -> np.ndarray:
        return expit(self.log_odds)

    @property
    def log_p(self) -> np.ndarray:
        return log_expit(self.log_odds)

    @property
    def log_1mp(self) -> np.ndarray:
        return log_expit(-self.log_odds)


@dataclass(frozen=True)
class ConditionalTable:
    profile: BernoulliProfile
    k: int
    log_table: np.ndarray  # shape (N + 1, k + 1)

    @property
    def N(self) -> int:
        return len(self.profile)

    def suffix_probability(self, i: int, q: int) -> float:
        """Pr[nnz(X_i..X_{N-1}) = q]; zero outside the stored range."""
        if q < 0 or q > self.k:
            return 0.0
        return float(np.exp(self.log_table[i, q]))


def _check_count(N: int, k: int) -> None:
    if not 0 <= k <= N:
        raise DomainError(f"success count k={k} outside [0, {N}]")


def build_table(profile: BernoulliProfile, k: int) -> ConditionalTable:
    N = len(profile)
    _check_count(N, k)
    entries = (N + 1) * (k + 1)
    if entries > MAX_TABLE_ENTRIES:
        raise CapacityError(
            f"conditional table would hold {entries} entries (cap {MAX_TABLE_ENTRIES}); "
            "use a smaller k or blocked recomputation"
        )
    log_p = profile.log_p
    log_1mp = profile.log_1mp
    table = np.full((N + 1, k + 1), -np.inf)
    table[N, 0] = 0.0
    for i in range(N - 1, -1, -1):
        nxt = table[i + 1]
        row = table[i]
        row[:] = log_1mp[i] + nxt
        if k > 0:
            row[1:] = np.logaddexp(row[1:], log_p[i] + nxt[:-1])
    table.setflags(write=False)
    logger.debug("built conditional table N=%d k=%d", N, k)
    return ConditionalTable(profile=profile, k=k, log_table=table)


def conditional_marginal(table: ConditionalTable, i: int, remaining: int) -> float:
    """Pr[X_i = 1 | nnz(X_i..X_{N-1}) = remaining]."""
    N = table.N
    if not 0 <= i < N:
        raise DomainError(f"coordinate {i} outside [0, {N})")
    if not 0 <= remaining <= table.k:
        raise DomainError(f"remaining count {remaining} outside [0, {table.k}]")
    if remaining == 0:
        return 0.0
    nxt = table.log_table[i + 1]
    num = table.profile.log_p[i] + nxt[remaining - 1]
    den = np.logaddexp(num, table.profile.log_1mp[i] + nxt[remaining])
    if den == -np.inf:
        raise InvariantViolation(f"zero marginal denominator at coordinate {i}, remaining {remaining}")
    return float(np.exp(num - den))


def sample_conditional(
    profile: BernoulliProfile,
    k: int,
    rng: np.random.Generator,
    size: Optional[int] = None,
    table: Optional[ConditionalTable] = None,
) -> np.ndarray:
    """
    Draw configurations with exactly k ones, distributed as the product measure
    conditioned on nnz = k. Returns shape (N,) or, with `size`, (size, N).
    """
    if table is None:
        table = build_table(profile, k)
    elif table.profile is not profile or table.k != k:
        raise DomainError("table was built for a different profile or count")
    N = table.N
    if table.log_table[0, k] == -np.inf:
        raise DomainError(f"no configuration with exactly {k} successes has positive probability")

    draws = 1 if size is None else int(size)
    x = np.zeros((draws, N), dtype=np.int8)
    remaining = np.full(draws, k, dtype=np.int64)
    log_p = profile.log_p
    log_1mp = profile.log_1mp
    lt = table.log_table
    for i in range(N - 1):
        if not remaining.any():
            break
        nxt = lt[i + 1]
        prev = np.where(remaining > 0, nxt[np.maximum(remaining - 1, 0)], -np.inf)
        num = log_p[i] + prev
        den = np.logaddexp(num, log_1mp[i] + nxt[remaining])
        forced_one = remaining >= N - i
        free = (remaining > 0) & ~forced_one
        if (free & (den == -np.inf)).any():
            raise InvariantViolation(f"zero marginal denominator at coordinate {i}")
        with np.errstate(invalid="ignore"):
            marginal = np.exp(num - den)
        marginal = np.where(forced_one, 1.0, np.where(remaining == 0, 0.0, marginal))
        take = rng.random(draws) < marginal
        x[:, i] = take
        remaining -= take
    if ((remaining < 0) | (remaining > 1)).any():
        raise InvariantViolation("residual count for the last coordinate is not 0 or 1")
    x[:, N - 1] = remaining
    if size is None:
        return x[0]
    return x


# -- rational-arithmetic oracles -------------------------------------------


def _fractions(profile: BernoulliProfile) -> List[Fraction]:
    return [Fraction(float(p)) for p in profile.probabilities]


def build_table_exact(profile: BernoulliProfile, k: int) -> List[List[Fraction]]:
    """The suffix-count table in rational arithmetic; rows as in build_table."""
    N = len(profile)
    _check_count(N, k)
    p = _fractions(profile)
    table = [[Fraction(0)] * (k + 1) for _ in range(N + 1)]
    table[N][0] = Fraction(1)
    for i in range(N - 1, -1, -1):
        for q in range(k + 1):
            val = (1 - p[i]) * table[i + 1][q]
            if q > 0:
                val += p[i] * table[i + 1][q - 1]
            table[i][q] = val
    return table


def configuration_probability(
    profile: BernoulliProfile, k: int, x: Sequence[int], exact: bool = False
):
    """
    Probability that sample_conditional returns configuration x: the product of
    the sequential conditional marginals. Returns a Fraction when exact=True.
    """
    N = len(profile)
    x = [int(b) for b in x]
    if len(x) != N or any(b not in (0, 1) for b in x):
        raise DomainError(f"configuration must be a 0/1 vector of length {N}")
    zero = Fraction(0) if exact else 0.0
    if sum(x) != k:
        return zero

    if exact:
        p = _fractions(profile)
        table = build_table_exact(profile, k)
        prob = Fraction(1)
        remaining = k
        for i in range(N - 1):
            if remaining == 0:
                marginal = Fraction(0)
            else:
                num = p[i] * table[i + 1][remaining - 1]
                den = num + (1 - p[i]) * table[i + 1][remaining]
                if den == 0:
                    return zero
                marginal = num / den
            prob *= marginal if x[i] else (1 - marginal)
            remaining -= x[i]
        return prob

    table = build_table(profile, k)
    log_prob = 0.0
    remaining = k
    for i in range(N - 1):
        marginal = conditional_marginal(table, i, remaining)
        factor = marginal if x[i] else 1.0 - marginal
        if factor <= 0.0:
            return zero
        log_prob += float(np.log(factor))
        remaining -= x[i]
    return float(np.exp(log_prob))


def enumerate_conditional(
    profile: BernoulliProfile, k: int, exact: bool = False
) -> Dict[Configuration, object]:
    """
    Exact conditional law over all configurations with k ones, by summing the
    product measure. Keys follow lexicographic order of the chosen coordinates.
    """
    N = len(profile)
    _check_count(N, k)
    if N > MAX_ENUMERATION_SLOTS:
        raise CapacityError(f"enumeration over N={N} coordinates exceeds cap {MAX_ENUMERATION_SLOTS}")

    keys: List[Configuration] = []
    for chosen in itertools.combinations(range(N), k):
        bits = [0] * N
        for c in chosen:
            bits[c] = 1
        keys.append(tuple(bits))

    if exact:
        p = _fractions(profile)
        weights = []
        for bits in keys:
            w = Fraction(1)
            for pi, b in zip(p, bits):
                w *= pi if b else (1 - pi)
            weights.append(w)
        total = sum(weights, Fraction(0))
        if total == 0:
            raise DomainError(f"no configuration with exactly {k} successes has positive probability")
        return {key: w / total for key, w in zip(keys, weights)}

    bits_arr = np.array(keys, dtype=np.float64).reshape(len(keys), N)
    log_p = profile.log_p
    log_1mp = profile.log_1mp
    with np.errstate(invalid="ignore"):
        log_w = np.where(bits_arr == 1, log_p, log_1mp).sum(axis=1)
    log_total = logsumexp(log_w)
    if log_total == -np.inf:
        raise DomainError(f"no configuration with exactly {k} successes has positive probability")
    probs = np.exp(log_w - log_total)
    return {key: float(pr) for key, pr in zip(keys, probs)}
