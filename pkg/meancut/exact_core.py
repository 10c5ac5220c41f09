"""
exact_core.py
-------------
Exact rational evaluation of P(k, l) and the identities around it.

P(k, l) is the regularized incomplete beta value at the mean cut k/(k+l).
Repeated partial integration turns it into the finite sum

    P(k, l) = sum_{nu<k} C(k+l, nu) k^nu l^(k+l-nu) / (k+l)^(k+l)

which is evaluated here with Python integers and returned as a Fraction.
Every other module uses these values as ground truth.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from numbers import Integral
from typing import Tuple

from meancut.errors import DomainError, UndecidedError

logger = logging.getLogger(__name__)

ExactRational = Fraction


# --- Domain types ----------------------------------------------------------
def _check_positive_int(name: str, value, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise DomainError(f"{name} must be >= {minimum}")
    return int(value)


@dataclass(frozen=True, order=True)
class ParamPair:
    """Shape parameters (k, l), both >= 1"""

    k: int
    l: int  # noqa: E741

    def __post_init__(self):
        object.__setattr__(self, "k", _check_positive_int("k", self.k))
        object.__setattr__(self, "l", _check_positive_int("l", self.l))

    @property
    def n(self) -> int:
        return self.k + self.l

    def swapped(self) -> "ParamPair":
        return ParamPair(self.l, self.k)


@dataclass(frozen=True)
class IntervalRational:
    """Rational enclosure lo < value < hi of a transcendental number"""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, q) -> bool:
        return self.lo < q < self.hi

    def format(self) -> str:
        return f"{format_rational(self.lo)},{format_rational(self.hi)}"


def format_rational(q: Fraction) -> str:
    """Render as 'num/den', integers included"""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    num, sep, den = text.strip().partition("/")
    try:
        return Fraction(int(num), int(den) if sep else 1)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational 'num/den': {text!r}") from exc


def parse_interval(text: str) -> IntervalRational:
    lo, sep, hi = text.partition(",")
    if not sep:
        raise DomainError(f"not an interval 'lo,hi': {text!r}")
    return IntervalRational(parse_rational(lo), parse_rational(hi))


# --- P(k, l) ---------------------------------------------------------------
def _p_numerator(k: int, l: int) -> int:  # noqa: E741
    """sum_{nu<k} C(n, nu) k^nu l^(n-nu) by the integer term recurrence"""
    n = k + l
    term = l ** n
    total = 0
    for nu in range(k):
        total += term
        # exact: term_{nu+1} * (nu+1) * l == term_nu * (n-nu) * k
        term = term * (n - nu) * k // ((nu + 1) * l)
    return total


def exact_p(p: ParamPair) -> Fraction:
    """P(k, l) as an exact fraction in lowest terms"""
    if not isinstance(p, ParamPair):
        p = ParamPair(*p)
    return Fraction(_p_numerator(p.k, p.l), p.n ** p.n)


def exact_swap_defect(p: ParamPair) -> Fraction:
    """C(k+l, k) k^k l^l / (k+l)^(k+l), which equals 1 - P(k,l) - P(l,k)"""
    if not isinstance(p, ParamPair):
        p = ParamPair(*p)
    k, l, n = p.k, p.l, p.n  # noqa: E741
    return Fraction(comb(n, k) * k ** k * l ** l, n ** n)


# --- Poisson partial sums and e^l ------------------------------------------
def _poisson_numerator(m: int, n: int) -> int:
    """n! * sum_{nu<=n} m^nu/nu!, accumulated with exact integer steps"""
    term = factorial(n)
    total = term
    for nu in range(1, n + 1):
        term = term * m // nu  # m^nu n!/nu! stays integral
        total += term
    return total


def poisson_partial_sum(m: int, n: int) -> Fraction:
    """sum_{nu=0}^{n} m^nu / nu! exactly"""
    m = _check_positive_int("m", m)
    n = _check_positive_int("n", n, minimum=0)
    return Fraction(_poisson_numerator(m, n), factorial(n))


def _exp_enclosure(l: int, terms: int) -> IntervalRational:  # noqa: E741
    # Taylor partial sum to `terms` plus the geometric majorant of the remainder:
    # R < l^(N+1)/(N+1)! * 1/(1 - l/(N+2)), valid once N+2 > l
    lo = poisson_partial_sum(l, terms)
    first_omitted = Fraction(l ** (terms + 1), factorial(terms + 1))
    hi = lo + first_omitted / (1 - Fraction(l, terms + 2))
    return IntervalRational(lo, hi)


def e_power_interval(l: int, eps) -> IntervalRational:  # noqa: E741
    """Rational interval strictly enclosing e^l with width <= eps"""
    l = _check_positive_int("l", l)  # noqa: E741
    eps = Fraction(eps)
    if eps <= 0:
        raise DomainError("eps must be > 0")
    terms = max(2 * l, 8)
    enclosure = _exp_enclosure(l, terms)
    while enclosure.width > eps:
        terms *= 2
        enclosure = _exp_enclosure(l, terms)
    logger.debug("e^%d enclosed with %d Taylor terms", l, terms)
    return enclosure


def karamata_check(l: int, max_depth: int = 64) -> Tuple[bool, bool]:  # noqa: E741
    """Decide sum_{nu<l} l^nu/nu! < e^l/2 < sum_{nu<=l} l^nu/nu!

    Both sides are exact; e^l is enclosed by rationals and the enclosure is
    tightened until each strict comparison is decided.
    """
    l = _check_positive_int("l", l)  # noqa: E741
    twice_lower = 2 * poisson_partial_sum(l, l - 1)
    twice_upper = 2 * poisson_partial_sum(l, l)
    eps = Fraction(l ** l, factorial(l))
    for depth in range(max_depth + 1):
        box = e_power_interval(l, eps)
        lower_decided = box.lo > twice_lower or box.hi <= twice_lower
        upper_decided = box.hi < twice_upper or box.lo >= twice_upper
        if lower_decided and upper_decided:
            logger.debug("karamata l=%d decided at depth %d", l, depth)
            return box.lo > twice_lower, box.hi < twice_upper
        eps /= 16
    raise UndecidedError(f"undecided at precision limit (l={l}, depth={max_depth})")
