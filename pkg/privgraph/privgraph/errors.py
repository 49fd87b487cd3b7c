# privgraph/privgraph/errors.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

E_DOMAIN = "E_DOMAIN"
E_CAPACITY = "E_CAPACITY"
E_CONVERGENCE = "E_CONVERGENCE"
E_INVARIANT = "E_INVARIANT"
E_CONFIG = "E_CONFIG"
E_EDGELIST = "E_EDGELIST"


@dataclass(frozen=True)
class SourceLine:
    """A line in an input file."""
    path: str
    line: int

    def __str__(self) -> str:
        return f"{self.path}:{self.line}"


class PrivGraphError(Exception):
    """Base class for all errors raised by privgraph."""
    code = "E_PRIVGRAPH"

    def __init__(self, message: str, loc: Optional[SourceLine] = None):
        super().__init__(message)
        self.message = message
        self.loc = loc

    def __str__(self) -> str:
        if self.loc:
            return f"{self.message} [{self.loc}]"
        return self.message


class DomainError(PrivGraphError, ValueError):
    """An input lies outside the domain of the operation."""
    code = E_DOMAIN


class CapacityError(PrivGraphError):
    """An exhaustive routine or table would exceed its size cap."""
    code = E_CAPACITY


class ConvergenceError(PrivGraphError):
    """An iterative solver stopped before meeting its tolerance."""
    code = E_CONVERGENCE

    def __init__(self, message: str, best_estimate: Optional[float] = None):
        super().__init__(message)
        self.best_estimate = best_estimate


class InvariantViolation(PrivGraphError):
    """An internal invariant failed; indicates a bug rather than bad input."""
    code = E_INVARIANT


class ConfigurationError(PrivGraphError):
    code = E_CONFIG


class EdgeListError(PrivGraphError):
    """A malformed edge-list file."""
    code = E_EDGELIST
