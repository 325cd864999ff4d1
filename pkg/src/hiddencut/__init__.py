"""Classical toolkit for hidden-cut circuit output distributions and
weak-entanglement detection heuristics."""

from . import abelianhsp, binmath, hcsim, heuristics, qstate
from .errors import (
    CapacityError,
    ConsistencyError,
    DegeneracyError,
    DimensionError,
    DomainError,
    HiddenCutError,
)

__all__ = [
    "abelianhsp",
    "binmath",
    "hcsim",
    "heuristics",
    "qstate",
    "HiddenCutError",
    "DimensionError",
    "CapacityError",
    "DomainError",
    "DegeneracyError",
    "ConsistencyError",
]

__version__ = "0.1.0"
