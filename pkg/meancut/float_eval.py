"""
float_eval.py
-------------
Overflow-proof double precision evaluation of P(k, l) and of the Poisson
sums that appear as its limits.

All sums here have positive terms generated by a multiplicative recurrence.
Terms are carried in linear space relative to a running log-scale; when a
term would pass 1e300 the scale is moved onto it, so nothing overflows and
the leading factor never underflows.

For k > l, P is taken as one minus the l+1 terms above the cut, which keeps
the leading log factor of order l instead of n log(n/l).
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable

from meancut.errors import EnvelopeWarning
from meancut.exact_core import ParamPair, _check_positive_int

logger = logging.getLogger(__name__)

ENVELOPE = 10 ** 8
_HUGE = 1e300


@dataclass(frozen=True)
class LogReal:
    """sign * exp(log_abs); log_abs is ignored when sign == 0"""

    sign: int
    log_abs: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign!r}")

    @classmethod
    def from_float(cls, x: float) -> "LogReal":
        if x == 0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)

    def __mul__(self, other: "LogReal") -> "LogReal":
        sign = self.sign * other.sign
        if sign == 0:
            return LogReal(0, -math.inf)
        return LogReal(sign, self.log_abs + other.log_abs)

    def log_add(self, other: "LogReal") -> "LogReal":
        """Sum of two nonnegative values without leaving log space"""
        if self.sign < 0 or other.sign < 0:
            raise ValueError("log_add is defined for nonnegative values only")
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        hi, lo = max(self.log_abs, other.log_abs), min(self.log_abs, other.log_abs)
        return LogReal(1, hi + math.log1p(math.exp(lo - hi)))


class ScaledSum:
    """Compensated (Neumaier) sum of positive terms held as value * exp(shift)

    The shift is kept as a list of increments and summed with fsum, so many
    small moves of a large scale do not accumulate rounding.
    """

    def __init__(self, shift: float = 0.0):
        self._shifts = [shift]
        self.total = 0.0
        self.comp = 0.0

    @property
    def shift(self) -> float:
        return math.fsum(self._shifts)

    def add(self, x: float) -> None:
        t = self.total + x
        if abs(self.total) >= abs(x):
            self.comp += (self.total - t) + x
        else:
            self.comp += (x - t) + self.total
        self.total = t

    def shift_by(self, delta: float) -> None:
        factor = math.exp(-delta)
        self.total *= factor
        self.comp *= factor
        self._shifts.append(delta)

    def rescale(self, new_shift: float) -> None:
        self.shift_by(new_shift - self.shift)

    def value(self) -> LogReal:
        s = self.total + self.comp
        if s == 0:
            return LogReal(0, -math.inf)
        return LogReal(1, math.fsum(self._shifts + [math.log(s)]))


def scaled_series(log_first: float, ratio: Callable[[int], float], count: int) -> LogReal:
    """sum_{j<count} a_j where a_0 = exp(log_first), a_{j+1} = a_j * ratio(j)"""
    acc = ScaledSum(log_first)
    term = 1.0
    for j in range(count):
        acc.add(term)
        r = ratio(j)
        nxt = term * r
        # the total already holds a_0, so only growth needs a new scale
        if nxt > _HUGE:
            # move the scale onto the next term; logs taken apart so inf/0 never appear
            acc.shift_by(math.log(term) + math.log(r))
            nxt = 1.0
        term = nxt
    return acc.value()


# --- P(k, l) ---------------------------------------------------------------
def log_p_logreal(p: ParamPair) -> LogReal:
    """P(k, l) in log space from the finite-sum representation"""
    if not isinstance(p, ParamPair):
        p = ParamPair(*p)
    k, l, n = p.k, p.l, p.n  # noqa: E741
    if n > ENVELOPE:
        warnings.warn(f"k+l={n} exceeds the accuracy envelope {ENVELOPE}", EnvelopeWarning,
                      stacklevel=2)
    if k <= l:
        ratio_kl = k / l
        # leading factor (l/n)^n as one log-space shift; |log_first| <= n log 2
        log_first = n * math.log1p(-k / n)
        return scaled_series(log_first, lambda nu: (n - nu) * ratio_kl / (nu + 1), k)
    # k > l: sum the l+1 terms above the cut instead, leading factor (k/n)^n.
    # P >= 1/4 bounds the loss in 1 - upper to a factor 4.
    ratio_lk = l / k
    log_first = n * math.log1p(-l / n)
    upper = scaled_series(log_first, lambda j: (n - j) * ratio_lk / (j + 1), l + 1)
    return LogReal.from_float(1.0 - upper.to_float())


def log_p(p: ParamPair) -> float:
    """P(k, l) in double precision, stable far beyond where exp/binomials overflow"""
    return log_p_logreal(p).to_float()


# --- Poisson sums ----------------------------------------------------------
def _poisson_sum(m: int, count: int) -> LogReal:
    # e^{-m} sum_{nu<count} m^nu/nu!, with e^{-m} applied once as the shift
    return scaled_series(-float(m), lambda nu: m / (nu + 1), count)


def poisson_tail(k: int) -> float:
    """e^{-k} sum_{nu=0}^{k-1} k^nu/nu!, the l -> infinity limit of P(k, l)"""
    k = _check_positive_int("k", k)
    return _poisson_sum(k, k).to_float()


def poisson_upper(l: int) -> float:  # noqa: E741
    """1 - e^{-l} sum_{nu=0}^{l} l^nu/nu! (upper index l inclusive)"""
    l = _check_positive_int("l", l)  # noqa: E741
    return 1.0 - _poisson_sum(l, l + 1).to_float()


def poisson_mode_term(m: int) -> float:
    """e^{-m} m^m / m!"""
    m = _check_positive_int("m", m)
    log_term = -float(m)
    # product of m/nu for nu = 1..m, folded into log space in chunks
    running = 1.0
    for nu in range(1, m + 1):
        running *= m / nu
        if running > _HUGE:
            log_term += math.log(running)
            running = 1.0
    return math.exp(log_term + math.log(running))
