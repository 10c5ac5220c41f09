"""
errors.py
---------
Exception hierarchy shared by every meancut module.
"""


class MeanCutError(Exception):
    """Base class for all meancut failures"""


class DomainError(MeanCutError, ValueError):
    """Argument outside the mathematical domain (k < 1, x <= 0, ...)"""


class RegimeError(DomainError):
    """Fit grid outside the regime where an approximant is meaningful"""


class ConfigError(MeanCutError, ValueError):
    """Invalid configuration value"""


class QuadratureError(MeanCutError, ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance"""


class SeriesBudgetError(MeanCutError, ArithmeticError):
    """Series truncation index would exceed the configured cap"""


class UndecidedError(MeanCutError, ArithmeticError):
    """Interval refinement hit its depth limit without deciding a comparison"""


class AssumptionError(MeanCutError, ArithmeticError):
    """An empirical bound the algorithm relies on was violated at runtime"""


class EnvelopeWarning(UserWarning):
    """Parameters beyond the documented accuracy envelope"""
