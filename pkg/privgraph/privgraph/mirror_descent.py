"""
Private mirror descent over edge slots: a multiplicative-weights synthesizer
that learns a non-negative weight vector from noisy (S, T)-cut answers.

Budget: a share `mass_fraction` of epsilon pays for a Laplace estimate of the
total weight; the rest is split evenly over T rounds so that advanced
composition of the rounds (delta' = delta) lands on the remaining epsilon.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, DomainError
from .graph import Graph, _pair_index, num_slots
from .privacy import BudgetLedger, PrivacyBudget, compose_advanced, laplace_noise, per_fold_epsilon

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MirrorDescentConfig:
    iterations: Optional[int] = None  # default ceil(n ln n)
    mass_fraction: float = 0.5
    step_size: Optional[float] = None  # default 1/sqrt(T)


@dataclass(frozen=True)
class MirrorDescentPlan:
    iterations: int
    step_size: float
    mass_epsilon: float
    round_epsilon: float
    composed: PrivacyBudget  # advanced composition of the rounds


@dataclass(frozen=True)
class MirrorDescentResult:
    graph: Graph
    plan: MirrorDescentPlan
    mass_estimate: float
    noise_floor: float


def default_iterations(n: int) -> int:
    return max(1, math.ceil(n * math.log(n))) if n > 1 else 1


def plan_budget(n: int, epsilon: float, delta: float, config: MirrorDescentConfig) -> MirrorDescentPlan:
    if not (math.isfinite(epsilon) and epsilon > 0):
        raise ConfigurationError(f"mirror descent needs a positive epsilon, got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise ConfigurationError(f"mirror descent needs delta in (0, 1), got {delta}")
    if not 0.0 < config.mass_fraction < 1.0:
        raise ConfigurationError(f"mass_fraction must lie in (0, 1), got {config.mass_fraction}")
    rounds = config.iterations if config.iterations is not None else default_iterations(n)
    if rounds < 1:
        raise ConfigurationError(f"mirror descent needs at least one round, got {rounds}")
    step = config.step_size if config.step_size is not None else 1.0 / math.sqrt(rounds)
    if not step > 0:
        raise ConfigurationError(f"step size must be positive, got {step}")

    mass_eps = config.mass_fraction * epsilon
    round_eps = per_fold_epsilon((1.0 - config.mass_fraction) * epsilon, rounds, delta)
    if not round_eps > 0 or not math.isfinite(1.0 / round_eps):
        raise ConfigurationError(
            f"per-round epsilon underflows for T={rounds}, epsilon={epsilon}, delta={delta}"
        )
    return MirrorDescentPlan(
        iterations=rounds,
        step_size=step,
        mass_epsilon=mass_eps,
        round_epsilon=round_eps,
        composed=compose_advanced(round_eps, 0.0, rounds, delta),
    )


def noise_floor(n: int, epsilon: float, delta: float, config: MirrorDescentConfig, beta: float = 0.1) -> float:
    """
    Magnitude the total-mass noise stays below with probability 1 - beta. On an
    empty input every synthesized cut is bounded by the mass estimate, so this
    also bounds the cut error there.
    """
    plan = plan_budget(n, epsilon, delta, config)
    return math.log(1.0 / beta) / plan.mass_epsilon


def mirror_descent_synthesize(
    G_light: Graph,
    epsilon: float,
    delta: float,
    beta: float,
    config: MirrorDescentConfig,
    rng: np.random.Generator,
    ledger: Optional[BudgetLedger] = None,
) -> MirrorDescentResult:
    """
    Synthesize a non-negative graph whose random (S, T)-cuts track those of
    G_light. Charged exactly (epsilon, delta); the output is the average iterate.
    """
    n = G_light.n
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    plan = plan_budget(n, epsilon, delta, config)
    if ledger is not None:
        ledger.charge("mirror_descent", epsilon, delta)
    floor = math.log(1.0 / beta) / plan.mass_epsilon

    N = num_slots(n)
    truth = G_light.to_vector()
    mass = max(0.0, float(truth.sum()) + laplace_noise(1.0 / plan.mass_epsilon, rng))
    if N == 0:
        return MirrorDescentResult(graph=Graph.empty(n), plan=plan, mass_estimate=mass, noise_floor=floor)

    us, vs = _pair_index(n)
    x = np.full(N, mass / N)
    running = np.zeros(N)
    round_scale = 1.0 / plan.round_epsilon
    for _ in range(plan.iterations):
        side = rng.integers(0, 3, size=n)  # 0 neither, 1 in S, 2 in T
        in_s = side == 1
        in_t = side == 2
        crosses = (in_s[us] & in_t[vs]) | (in_s[vs] & in_t[us])
        answer = float(truth[crosses].sum()) + laplace_noise(round_scale, rng)
        direction = np.sign(float(x[crosses].sum()) - answer)
        if direction != 0 and crosses.any():
            x = x * np.exp(-plan.step_size * direction * crosses)
            total = x.sum()
            if total > 0:
                x *= mass / total
        running += x
    logger.debug(
        "mirror descent: T=%d eta=%.4g eps_round=%.4g mass=%.4g",
        plan.iterations, plan.step_size, plan.round_epsilon, mass,
    )
    return MirrorDescentResult(
        graph=Graph.from_vector(n, running / plan.iterations),
        plan=plan,
        mass_estimate=mass,
        noise_floor=floor,
    )
