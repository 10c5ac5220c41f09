"""Mean-cut incomplete beta values P(k, l) = I_{k/(k+l)}(k, l+1)."""

from meancut.errors import (
    AssumptionError,
    ConfigError,
    DomainError,
    EnvelopeWarning,
    MeanCutError,
    QuadratureError,
    RegimeError,
    SeriesBudgetError,
    UndecidedError,
)
from meancut.exact_core import ParamPair, exact_p, exact_swap_defect
from meancut.float_eval import log_p

__all__ = [
    "AssumptionError",
    "ConfigError",
    "DomainError",
    "EnvelopeWarning",
    "MeanCutError",
    "ParamPair",
    "QuadratureError",
    "RegimeError",
    "SeriesBudgetError",
    "UndecidedError",
    "exact_p",
    "exact_swap_defect",
    "log_p",
]
