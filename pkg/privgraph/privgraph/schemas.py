from __future__ import annotations

import json
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .cuts import CutRelease
from .errors import ConfigurationError
from .privacy import BudgetLedger
from .spectral import SpectralRelease


class ReleaseSettings(BaseModel):
    """Defaults for the release commands; explicit CLI flags override them."""
    model_config = ConfigDict(extra="forbid")
    schema_version: Literal[1] = 1
    epsilon: Optional[float] = Field(default=None, gt=0)
    delta: Optional[float] = Field(default=None, gt=0, lt=0.5)
    beta: Optional[float] = Field(default=None, gt=0, lt=1)
    seed: Optional[int] = None
    md_iterations: Optional[int] = Field(default=None, ge=1)
    mass_fraction: Optional[float] = Field(default=None, gt=0, lt=1)


class LedgerEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")
    label: str
    epsilon: float
    delta: float


class BudgetRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")
    epsilon: float
    delta: float


class MirrorDescentMeta(BaseModel):
    model_config = ConfigDict(extra="forbid")
    iterations: int
    step_size: float
    mass_epsilon: float
    round_epsilon: float
    composed_epsilon: float
    composed_delta: float
    mass_estimate: float


class ReleaseMeta(BaseModel):
    model_config = ConfigDict(extra="forbid")
    schema_version: Literal[1] = 1
    mechanism: Literal["spectral", "cut"]
    n: int
    m: int
    m_hat: int
    epsilon: float
    delta: float = 0.0
    beta: float
    seed: Optional[int] = None
    budget: BudgetRecord
    ledger: List[LedgerEntry]
    wall_time_ms: Optional[float] = None
    heavy_slots: Optional[int] = None
    light_slots: Optional[int] = None
    residual_edges: Optional[int] = None
    residual_max_weight: Optional[float] = None
    mirror_descent: Optional[MirrorDescentMeta] = None
    report_sha256: Optional[str] = None


def _ledger_entries(ledger: BudgetLedger) -> List[LedgerEntry]:
    return [LedgerEntry(**record) for record in ledger.as_records()]


def release_meta(release: Union[SpectralRelease, CutRelease], wall_time_ms: Optional[float] = None) -> ReleaseMeta:
    total = release.budget
    common = dict(
        n=release.graph.n,
        m=release.m,
        m_hat=release.m_hat,
        epsilon=release.epsilon,
        beta=release.beta,
        seed=release.seed,
        budget=BudgetRecord(epsilon=total.epsilon, delta=total.delta),
        ledger=_ledger_entries(release.ledger),
        wall_time_ms=wall_time_ms,
    )
    if isinstance(release, SpectralRelease):
        return ReleaseMeta(mechanism="spectral", **common)
    plan = release.plan
    return ReleaseMeta(
        mechanism="cut",
        delta=release.delta,
        heavy_slots=release.heavy_part.stored_count,
        light_slots=release.light_part.stored_count,
        residual_edges=release.residual_edges,
        residual_max_weight=release.residual_max_weight,
        mirror_descent=MirrorDescentMeta(
            iterations=plan.iterations,
            step_size=plan.step_size,
            mass_epsilon=plan.mass_epsilon,
            round_epsilon=plan.round_epsilon,
            composed_epsilon=plan.composed.epsilon,
            composed_delta=plan.composed.delta,
            mass_estimate=release.mass_estimate,
        ),
        **common,
    )


def load_model(model: type, path: Path):
    """Parse a JSON document into `model`, mapping failures to ConfigurationError."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigurationError(f"invalid json in {path}: {exc}") from exc
    try:
        return model.model_validate(raw)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid {model.__name__} in {path}: {exc}") from exc
