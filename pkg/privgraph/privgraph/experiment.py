"""
Experiment runner: generate graphs, run mechanisms over seeded trials, record
per-trial error metrics, and check config-held thresholds.

Seeds: every (cell, trial) pair gets its own SeedSequence keyed off the root
seed, so reports are identical regardless of thread count.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import __version__
from .baselines import naive_cut_baseline
from .cuts import cut_release
from .errors import ConfigurationError
from .generators import degree_capped_graph, random_connected_graph, random_graph
from .graph import Graph, max_unweighted_degree, max_weight_difference, num_slots
from .mirror_descent import MirrorDescentConfig, mirror_descent_synthesize
from .oracles import MAX_TERNARY_VERTICES, brute_force_max_cut_error, spectral_error
from .spectral import spectral_release

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
DEFAULT_SPECTRAL_BETA = 0.1
DEFAULT_MD_BETA = 0.1

MetricName = Literal[
    "spectral_error",
    "max_cut_error",
    "max_edge_error",
    "max_unweighted_degree",
    "degree_growth",
    "m_hat",
    "heavy_retention",
    "residual_max_weight",
    "heavy_cut_error_scaled",
]
Statistic = Literal["median", "mean", "min", "max", "q10", "q90", "fraction_at_most"]

_DEFAULT_METRICS: Dict[str, List[str]] = {
    "spectral": ["spectral_error", "max_unweighted_degree", "m_hat"],
    "cut": ["max_cut_error"],
    "naive_cut": ["max_cut_error"],
    "mirror_descent": ["max_cut_error"],
}

# Metrics that read the selected slot set or the parts of a release.
_METRIC_KINDS: Dict[str, Tuple[str, ...]] = {
    "heavy_retention": ("spectral", "cut"),
    "residual_max_weight": ("cut",),
    "heavy_cut_error_scaled": ("cut",),
}


class GeneratorSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")
    family: Literal["uniform", "degree_capped", "connected"] = "uniform"
    n: int = Field(ge=2)
    m: Optional[int] = Field(default=None, ge=0)
    max_degree: Optional[int] = Field(default=None, ge=1)
    extra_edges: int = Field(default=0, ge=0)
    law: Literal["constant", "uniform", "heavy"] = "constant"
    scale: float = Field(default=1.0, gt=0)
    heavy_prob: float = Field(default=0.1, ge=0, le=1)
    # per_trial: fresh graph per (cell, trial); paired: one graph per trial index
    # shared by all cells; fixed: one graph for the whole experiment.
    seeding: Literal["per_trial", "paired", "fixed"] = "per_trial"

    @model_validator(mode="after")
    def validate_family_params(self) -> "GeneratorSpec":
        if self.family == "uniform" and self.m is None:
            raise ValueError("uniform family needs m")
        if self.family == "degree_capped" and self.max_degree is None:
            raise ValueError("degree_capped family needs max_degree")
        return self


class MechanismSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["spectral", "cut", "naive_cut", "mirror_descent"]
    label: Optional[str] = None
    epsilon: float = Field(gt=0)
    delta: Optional[float] = Field(default=None, gt=0, lt=0.5)
    beta: Optional[float] = Field(default=None, gt=0, lt=1)
    md_iterations: Optional[int] = Field(default=None, ge=1)
    mass_fraction: float = Field(default=0.5, gt=0, lt=1)
    metrics: Optional[List[MetricName]] = None

    @model_validator(mode="after")
    def fill_defaults(self) -> "MechanismSpec":
        if self.kind in ("cut", "mirror_descent") and self.delta is None:
            raise ValueError(f"{self.kind} mechanism needs delta")
        if self.label is None:
            self.label = self.kind
        if self.metrics is None:
            self.metrics = list(_DEFAULT_METRICS[self.kind])
        for metric in self.metrics:
            kinds = _METRIC_KINDS.get(metric)
            if kinds is not None and self.kind not in kinds:
                raise ValueError(f"metric {metric} is not recorded for {self.kind} mechanisms")
        return self


class SweepSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")
    parameter: Literal["n", "m", "max_degree", "weight_scale", "epsilon"]
    values: List[float] = Field(min_length=1)


class ThresholdSpec(BaseModel):
    """
    bound: statistic within [min, max] in each selected cell.
    monotone: statistic ordered across selected cells, up to `tolerance` (relative).
    ratio: statistic(numerator_cell) / statistic(denominator_cell), or, with
      `other`, statistic(mechanism) / statistic(other) per cell, within [min, max].
    compare: statistic(mechanism) strictly below statistic(other) per cell.

    A bound may be calibrated instead of stated: `pilot_median` freezes the
    median of a pilot run, and `pilot_factor` times it fills `max` (or, for
    fraction_at_most, `value`) when those are left unset.
    """
    model_config = ConfigDict(extra="forbid")
    kind: Literal["bound", "monotone", "ratio", "compare"]
    mechanism: str
    metric: MetricName
    statistic: Statistic = "median"
    value: Optional[float] = None  # argument of fraction_at_most
    min: Optional[float] = None
    max: Optional[float] = None
    pilot_median: Optional[float] = Field(default=None, gt=0)
    pilot_factor: Optional[float] = Field(default=None, gt=0)
    direction: Literal["nondecreasing", "nonincreasing"] = "nondecreasing"
    tolerance: float = Field(default=0.0, ge=0)
    numerator_cell: Optional[int] = None
    denominator_cell: Optional[int] = None
    other: Optional[str] = None
    cells: Optional[List[int]] = None

    @model_validator(mode="after")
    def validate_kind_fields(self) -> "ThresholdSpec":
        if (self.pilot_median is None) != (self.pilot_factor is None):
            raise ValueError("pilot_median and pilot_factor go together")
        if self.pilot_median is not None:
            if self.kind != "bound":
                raise ValueError("pilot calibration applies to bound thresholds only")
            ceiling = self.pilot_median * self.pilot_factor
            if self.statistic == "fraction_at_most":
                if self.value is None:
                    self.value = ceiling
            elif self.max is None:
                self.max = ceiling
        if self.statistic == "fraction_at_most" and self.value is None:
            raise ValueError("fraction_at_most needs value")
        if self.kind == "compare" and self.other is None:
            raise ValueError("compare threshold needs other")
        if self.kind == "ratio" and self.other is None and (
            self.numerator_cell is None or self.denominator_cell is None
        ):
            raise ValueError("ratio threshold needs other, or numerator_cell and denominator_cell")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")
    schema_version: Literal[1] = 1
    name: str
    seed: int = 0
    trials: int = Field(ge=1)
    threads: int = Field(default=1, ge=1)
    record_timing: bool = False
    generator: GeneratorSpec
    mechanisms: List[MechanismSpec] = Field(min_length=1)
    sweep: Optional[SweepSpec] = None
    thresholds: List[ThresholdSpec] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_labels(self) -> "ExperimentConfig":
        labels = [m.label for m in self.mechanisms]
        if len(set(labels)) != len(labels):
            raise ValueError(f"mechanism labels must be unique, got {labels}")
        return self


# -- cells and trials ------------------------------------------------------


def _cells(config: ExperimentConfig) -> List[Tuple[GeneratorSpec, List[MechanismSpec], Optional[float]]]:
    if config.sweep is None:
        return [(config.generator, config.mechanisms, None)]
    out = []
    param = config.sweep.parameter
    for value in config.sweep.values:
        gen = config.generator
        mechs = config.mechanisms
        if param == "epsilon":
            mechs = [m.model_copy(update={"epsilon": float(value)}) for m in mechs]
        elif param == "weight_scale":
            gen = gen.model_copy(update={"scale": float(value)})
        else:
            gen = gen.model_copy(update={param: int(value)})
        out.append((gen, mechs, value))
    return out


def _generate(spec: GeneratorSpec, rng: np.random.Generator) -> Graph:
    if spec.family == "uniform":
        return random_graph(spec.n, spec.m, rng, spec.law, spec.scale, spec.heavy_prob)
    if spec.family == "degree_capped":
        return degree_capped_graph(spec.n, spec.max_degree, rng, spec.m, spec.law, spec.scale, spec.heavy_prob)
    return random_connected_graph(spec.n, spec.extra_edges, rng, spec.law, spec.scale, spec.heavy_prob)


def _graph_seed(config: ExperimentConfig, cell: int, trial: int) -> np.random.SeedSequence:
    seeding = config.generator.seeding
    if seeding == "fixed":
        key: Tuple[int, ...] = (0,)
    elif seeding == "paired":
        key = (1, trial)
    else:
        key = (2, cell, trial)
    return np.random.SeedSequence(config.seed, spawn_key=key)


def _mechanism_seed(config: ExperimentConfig, cell: int, trial: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(config.seed, spawn_key=(3, cell, trial, index))


@dataclass(frozen=True)
class _Outcome:
    graph: Graph
    m_hat: int
    selected: Optional[Graph] = None  # slots chosen by the topology sampler, with released weights
    residual_max_weight: Optional[float] = None


def _run_mechanism(spec: MechanismSpec, G: Graph, rng: np.random.Generator) -> _Outcome:
    if spec.kind == "spectral":
        release = spectral_release(G, spec.epsilon, spec.beta or DEFAULT_SPECTRAL_BETA, rng)
        return _Outcome(release.graph, release.m_hat, selected=release.graph)
    md_config = MirrorDescentConfig(iterations=spec.md_iterations, mass_fraction=spec.mass_fraction)
    if spec.kind == "cut":
        release = cut_release(G, spec.epsilon, spec.delta, rng, beta=spec.beta, config=md_config)
        return _Outcome(
            release.graph,
            release.m_hat,
            selected=release.heavy_part,
            residual_max_weight=release.residual_max_weight,
        )
    if spec.kind == "naive_cut":
        H = naive_cut_baseline(G, spec.epsilon, rng)
        return _Outcome(H, num_slots(G.n))
    result = mirror_descent_synthesize(G, spec.epsilon, spec.delta, spec.beta or DEFAULT_MD_BETA, md_config, rng)
    return _Outcome(result.graph, result.graph.stored_count)


def _require_enumerable(metric: str, n: int) -> None:
    if n > MAX_TERNARY_VERTICES:
        raise ConfigurationError(f"{metric} needs n <= {MAX_TERNARY_VERTICES}, got n={n}")


def heavy_retention(G: Graph, selected: Graph, epsilon: float) -> float:
    """
    Fraction of edges with epsilon * w_e >= ln(100 N) that the sampler kept;
    1.0 when G has no such edge.
    """
    cutoff = math.log(100 * num_slots(G.n)) / epsilon
    heavy = [e for e, w in G.weights.items() if w >= cutoff]
    if not heavy:
        return 1.0
    return sum(e in selected.weights for e in heavy) / len(heavy)


def heavy_cut_error_scaled(G: Graph, heavy_part: Graph, m_hat: int, epsilon: float) -> float:
    """
    Max cut error of the released heavy part against G restricted to the same
    slots, in units of sqrt(n * m_hat) * ln(n) / epsilon.
    """
    restricted = Graph(n=G.n, weights={e: G.weights[e] for e in heavy_part.weights if e in G.weights})
    err, _ = brute_force_max_cut_error(restricted, heavy_part)
    unit = math.sqrt(G.n * max(m_hat, 1)) * math.log(G.n) / epsilon
    return err / unit


def degree_growth(G: Graph, H: Graph) -> float:
    """Delta(H) / (Delta(G) * ln n), with Delta(G) floored at 1."""
    return max_unweighted_degree(H) / (max(1, max_unweighted_degree(G)) * math.log(G.n))


def _measure(metric: str, spec: MechanismSpec, G: Graph, out: _Outcome, rng: np.random.Generator) -> float:
    H = out.graph
    if metric == "spectral_error":
        return spectral_error(G, H, rng)
    if metric == "max_cut_error":
        _require_enumerable(metric, G.n)
        return brute_force_max_cut_error(G, H)[0]
    if metric == "max_edge_error":
        return max_weight_difference(G, H)
    if metric == "max_unweighted_degree":
        return float(max_unweighted_degree(H))
    if metric == "degree_growth":
        return degree_growth(G, H)
    if metric == "heavy_retention":
        return heavy_retention(G, out.selected, spec.epsilon)
    if metric == "residual_max_weight":
        return float(out.residual_max_weight)
    if metric == "heavy_cut_error_scaled":
        _require_enumerable(metric, G.n)
        return heavy_cut_error_scaled(G, out.selected, out.m_hat, spec.epsilon)
    return float(out.m_hat)


def _run_trial(
    config: ExperimentConfig, cell: int, trial: int, gen: GeneratorSpec, mechs: List[MechanismSpec]
) -> Dict[str, Dict[str, float]]:
    G = _generate(gen, np.random.default_rng(_graph_seed(config, cell, trial)))
    out: Dict[str, Dict[str, float]] = {}
    for index, spec in enumerate(mechs):
        mech_seq, measure_seq = _mechanism_seed(config, cell, trial, index).spawn(2)
        started = time.perf_counter()
        outcome = _run_mechanism(spec, G, np.random.default_rng(mech_seq))
        elapsed = (time.perf_counter() - started) * 1000.0
        measure_rng = np.random.default_rng(measure_seq)
        values = {metric: _measure(metric, spec, G, outcome, measure_rng) for metric in spec.metrics}
        values["runtime_ms"] = elapsed
        out[spec.label] = values
    return out


# -- statistics and thresholds ---------------------------------------------


def summarize(values: List[float]) -> Dict[str, float]:
    arr = np.asarray(values, dtype=np.float64)
    return {
        "median": float(np.median(arr)),
        "mean": float(arr.mean()),
        "min": float(arr.min()),
        "max": float(arr.max()),
        "q10": float(np.quantile(arr, 0.1)),
        "q90": float(np.quantile(arr, 0.9)),
    }


def statistic(values: List[float], name: str, value: Optional[float] = None) -> float:
    if name == "fraction_at_most":
        arr = np.asarray(values, dtype=np.float64)
        return float((arr <= value).mean())
    return summarize(values)[name]


def _cell_stat(cells: List[Dict[str, Any]], cell: int, label: str, th: ThresholdSpec) -> float:
    if not 0 <= cell < len(cells):
        raise ConfigurationError(f"threshold refers to cell {cell}; experiment has {len(cells)}")
    mechanisms = cells[cell]["mechanisms"]
    if label not in mechanisms:
        raise ConfigurationError(f"threshold refers to unknown mechanism {label!r}")
    metrics = mechanisms[label]["metrics"]
    if th.metric not in metrics:
        raise ConfigurationError(f"mechanism {label!r} does not record metric {th.metric!r}")
    return statistic(metrics[th.metric]["values"], th.statistic, th.value)


def _within(x: Optional[float], lo: Optional[float], hi: Optional[float]) -> bool:
    if x is None:
        return False
    return (lo is None or x >= lo) and (hi is None or x <= hi)


def evaluate_threshold(th: ThresholdSpec, cells: List[Dict[str, Any]], index: int = 0) -> Dict[str, Any]:
    selected = th.cells if th.cells is not None else list(range(len(cells)))
    observed: List[float] = []
    if th.kind == "bound":
        observed = [_cell_stat(cells, c, th.mechanism, th) for c in selected]
        passed = all(_within(x, th.min, th.max) for x in observed)
    elif th.kind == "monotone":
        observed = [_cell_stat(cells, c, th.mechanism, th) for c in selected]
        pairs = list(zip(observed, observed[1:]))
        if th.direction == "nondecreasing":
            passed = all(b >= a * (1.0 - th.tolerance) for a, b in pairs)
        else:
            passed = all(b <= a * (1.0 + th.tolerance) for a, b in pairs)
    elif th.kind == "ratio":
        if th.other is not None:
            observed = [
                _ratio(_cell_stat(cells, c, th.mechanism, th), _cell_stat(cells, c, th.other, th))
                for c in selected
            ]
        else:
            observed = [
                _ratio(
                    _cell_stat(cells, th.numerator_cell, th.mechanism, th),
                    _cell_stat(cells, th.denominator_cell, th.mechanism, th),
                )
            ]
        passed = all(_within(x, th.min, th.max) for x in observed)
    else:
        mine = [_cell_stat(cells, c, th.mechanism, th) for c in selected]
        theirs = [_cell_stat(cells, c, th.other, th) for c in selected]
        observed = mine + theirs
        passed = all(a < b for a, b in zip(mine, theirs))
    message = f"{th.kind} {th.statistic}({th.metric}) of {th.mechanism}: {'ok' if passed else 'violated'}"
    return {
        "index": index,
        "message": message,
        "kind": th.kind,
        "mechanism": th.mechanism,
        "metric": th.metric,
        "statistic": th.statistic,
        "observed": observed,
        "passed": bool(passed),
    }


def _ratio(a: float, b: float) -> Optional[float]:
    # None marks an undefined ratio; it fails any bound.
    if b == 0:
        return None if a != 0 else 1.0
    return a / b


# -- runner -------------------------------------------------------------------


def run_experiment(config: ExperimentConfig, threads: Optional[int] = None) -> Dict[str, Any]:
    """Run every (cell, trial) and assemble the report dict (without its self-hash)."""
    cells_spec = _cells(config)
    jobs = [(c, t) for c in range(len(cells_spec)) for t in range(config.trials)]
    workers = threads if threads is not None else config.threads

    def job(ct: Tuple[int, int]) -> Dict[str, Dict[str, float]]:
        c, t = ct
        gen, mechs, _ = cells_spec[c]
        return _run_trial(config, c, t, gen, mechs)

    logger.info("experiment %s: %d cells x %d trials, %d threads", config.name, len(cells_spec), config.trials, workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, jobs))
    else:
        results = [job(ct) for ct in jobs]
    by_job = dict(zip(jobs, results))

    cells: List[Dict[str, Any]] = []
    for c, (gen, mechs, value) in enumerate(cells_spec):
        mech_out: Dict[str, Any] = {}
        for spec in mechs:
            trials = [by_job[(c, t)][spec.label] for t in range(config.trials)]
            metrics = {
                metric: {"values": [tr[metric] for tr in trials], "summary": summarize([tr[metric] for tr in trials])}
                for metric in spec.metrics
            }
            entry: Dict[str, Any] = {"kind": spec.kind, "epsilon": spec.epsilon, "metrics": metrics}
            if config.record_timing:
                entry["runtime_ms"] = [tr["runtime_ms"] for tr in trials]
            mech_out[spec.label] = entry
        cells.append({
            "index": c,
            "parameter": config.sweep.parameter if config.sweep else None,
            "value": value,
            "n": gen.n,
            "mechanisms": mech_out,
        })

    checks = [evaluate_threshold(th, cells, i) for i, th in enumerate(config.thresholds)]
    for check in checks:
        if not check["passed"]:
            logger.warning("threshold %d failed: %s observed=%s", check["index"], check["message"], check["observed"])
    status = "passed" if all(ch["passed"] for ch in checks) else "failed"
    return {
        "report_schema_version": REPORT_SCHEMA_VERSION,
        "name": config.name,
        "seed": config.seed,
        "trials": config.trials,
        "engine": {"name": "privgraph", "version": __version__},
        "config": config.model_dump(mode="json"),
        "cells": cells,
        "thresholds": checks,
        "status": status,
    }
