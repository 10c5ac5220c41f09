"""
raab.py
-------
Product representation P(k, l) = U(k, l) * V(k, l) with

    U(k, l)  = exp(mu(k + l) - mu(k) - mu(l))
    V(k, l)  = sqrt(l)/(2 pi) * sum_{nu>=1} c_nu(k/l) / (sqrt(nu) (nu + l))
    c_nu(x)  = exp(mu(nu (1 + x)) - mu(nu x) - mu(nu))

where mu is the Binet integral. The V series decays like nu^(-3/2), so its
tail is either bounded (slow, certified by c_nu <= c_max) or evaluated by
Euler-Maclaurin on the smooth continuation of the summand.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import integrate

from meancut.binet import (
    DEFAULT_SPEC,
    STIRLING_MIN,
    QuadratureSpec,
    binet_mu,
    binet_mu_multiples,
    binet_mu_stirling,
)
from meancut.errors import AssumptionError, DomainError, SeriesBudgetError
from meancut.exact_core import ParamPair

logger = logging.getLogger(__name__)

C_MAX = 1.05
SERIES_CAP = 10_000_000
C_MAX_CHECK_TERMS = 100
_CHUNK = 1_000_000
_FD_STEP = 0.5


@dataclass(frozen=True)
class RaabResult:
    u: float
    v: float
    p: float
    trunc_n: int
    tail_bound: float


@dataclass(frozen=True)
class CNuArg:
    nu: int
    x: Fraction

    def __post_init__(self):
        if isinstance(self.nu, bool) or int(self.nu) != self.nu or self.nu < 1:
            raise DomainError(f"nu must be an integer >= 1, got {self.nu!r}")
        x = self.x if isinstance(self.x, Fraction) else Fraction(self.x)
        if x <= 0:
            raise DomainError(f"x must be > 0, got {self.x!r}")
        object.__setattr__(self, "nu", int(self.nu))
        object.__setattr__(self, "x", x)


class VSeries(NamedTuple):
    value: float
    trunc_n: int
    tail_bound: float


def _pair(p) -> ParamPair:
    return p if isinstance(p, ParamPair) else ParamPair(*p)


# --- U and c_nu ------------------------------------------------------------
def u_factor(p: ParamPair, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    p = _pair(p)
    k, l = Fraction(p.k), Fraction(p.l)  # noqa: E741
    return math.exp(binet_mu(k + l, spec) - binet_mu(k, spec) - binet_mu(l, spec))


def c_nu(arg: CNuArg, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    nu, x = Fraction(arg.nu), arg.x
    return math.exp(binet_mu(nu * (1 + x), spec) - binet_mu(nu * x, spec) - binet_mu(nu, spec))


def _log_c_array(nus: np.ndarray, x: Fraction, spec: QuadratureSpec) -> np.ndarray:
    return (binet_mu_multiples(nus, 1 + x, spec)
            - binet_mu_multiples(nus, x, spec)
            - binet_mu_multiples(nus, Fraction(1), spec))


def _series_terms(nus: np.ndarray, x: Fraction, l: int, spec: QuadratureSpec) -> Tuple[np.ndarray, np.ndarray]:  # noqa: E741
    c = np.exp(_log_c_array(nus, x, spec))
    nu_f = nus.astype(float)
    return c, c / (np.sqrt(nu_f) * (nu_f + l))


# --- V series tails --------------------------------------------------------
def _summand(t: np.ndarray, x: float, l: int) -> np.ndarray:  # noqa: E741
    """Smooth continuation f(t) = c(t)/(sqrt(t)(t+l)), Stirling regime only"""
    log_c = binet_mu_stirling(t * (1 + x)) - binet_mu_stirling(t * x) - binet_mu_stirling(t)
    return np.exp(log_c) / (np.sqrt(t) * (t + l))


def _euler_maclaurin_tail(n: int, x: float, l: int, tol: float) -> Tuple[float, float]:  # noqa: E741
    """sum_{nu>=n} f(nu) and an error bound (unscaled by sqrt(l)/2pi)"""
    h = _FD_STEP
    f_m2, f_m1, f_0, f_p1, f_p2 = _summand(n + h * np.arange(-2.0, 3.0), x, l)
    d1 = (f_m2 - 8.0 * f_m1 + 8.0 * f_p1 - f_p2) / (12.0 * h)
    d3 = (f_p2 - 2.0 * f_p1 + 2.0 * f_m1 - f_m2) / (2.0 * h ** 3)

    # int_n^inf dt/(sqrt(t)(t+l)) in closed form; the (c - 1) part by quadrature
    base = 2.0 / math.sqrt(l) * math.atan(math.sqrt(l / n))

    def excess(t: float) -> float:
        log_c = binet_mu_stirling(t * (1 + x)) - binet_mu_stirling(t * x) - binet_mu_stirling(t)
        return math.expm1(log_c) / (math.sqrt(t) * (t + l))

    extra, extra_err = integrate.quad(excess, n, np.inf, epsabs=tol / 10, epsrel=1e-12, limit=200)
    total = base + extra + f_0 / 2.0 - d1 / 12.0 + d3 / 720.0
    return total, abs(d3) / 720.0 + extra_err


def _partial_sum(stop: int, x: Fraction, l: int, spec: QuadratureSpec, c_max: float) -> float:  # noqa: E741
    """sum_{nu=1}^{stop} c_nu/(sqrt(nu)(nu+l)), compensated, in chunks"""
    partials = []
    for start in range(1, stop + 1, _CHUNK):
        nus = np.arange(start, min(start + _CHUNK, stop + 1), dtype=np.int64)
        c, terms = _series_terms(nus, x, l, spec)
        if start == 1:
            head = c[:C_MAX_CHECK_TERMS]
            if head.max() > c_max:
                raise AssumptionError(f"c_nu exceeds c_max: max {head.max():.6g} > {c_max}")
        if np.any(terms <= 0):
            raise AssumptionError("nonpositive V-series term")
        partials.append(math.fsum(terms))
    return math.fsum(partials)


def v_factor(p: ParamPair, series_tol: float = 1e-8, spec: QuadratureSpec = DEFAULT_SPEC,
             tail: str = "euler_maclaurin", cap: int = SERIES_CAP, c_max: float = C_MAX) -> VSeries:
    """V(k, l) with truncation index and tail bound"""
    p = _pair(p)
    if not series_tol > 0:
        raise DomainError("series_tol must be > 0")
    k, l = p.k, p.l  # noqa: E741
    x = Fraction(k, l)
    scale = math.sqrt(l) / (2.0 * math.pi)

    if tail == "bound":
        # (sqrt(l)/2pi) c_max int_N^inf dt/(sqrt(t)(t+l)) = (c_max/pi) atan(sqrt(l/N))
        n = max(l, math.ceil(l * (c_max / (math.pi * series_tol)) ** 2))
        tail_bound = c_max / math.pi * math.atan(math.sqrt(l / n))
        while tail_bound > series_tol:
            n = math.ceil(n * 1.1)
            tail_bound = c_max / math.pi * math.atan(math.sqrt(l / n))
        if n > cap:
            raise SeriesBudgetError(f"series budget exceeded: N={n} > cap {cap}")
        value = scale * _partial_sum(n, x, l, spec, c_max)
        logger.debug("V(%d,%d) bound mode: N=%d tail<=%.3g", k, l, n, tail_bound)
        return VSeries(value, n, tail_bound)

    if tail != "euler_maclaurin":
        raise DomainError(f"unknown tail mode {tail!r}")
    # every tail argument t*x, t*(1+x), t must sit in the Stirling regime
    n = max(64, l, math.ceil(STIRLING_MIN * l / k) + 2)
    xf = float(x)
    while True:
        if n > cap:
            raise SeriesBudgetError(f"series budget exceeded: N={n} > cap {cap}")
        tail_sum, tail_err = _euler_maclaurin_tail(n, xf, l, series_tol / scale)
        if scale * tail_err <= series_tol:
            break
        n *= 2
    value = scale * (_partial_sum(n - 1, x, l, spec, c_max) + tail_sum)
    logger.debug("V(%d,%d) Euler-Maclaurin: N=%d tail<=%.3g", k, l, n, scale * tail_err)
    return VSeries(value, n, scale * tail_err)


def raab_p(p: ParamPair, series_tol: float = 1e-8, spec: QuadratureSpec = DEFAULT_SPEC,
           tail: str = "euler_maclaurin", cap: int = SERIES_CAP, c_max: float = C_MAX) -> RaabResult:
    """P(k, l) assembled as U * V"""
    p = _pair(p)
    u = u_factor(p, spec)
    v = v_factor(p, series_tol, spec, tail=tail, cap=cap, c_max=c_max)
    return RaabResult(u=u, v=v.value, p=u * v.value, trunc_n=v.trunc_n, tail_bound=v.tail_bound)


def v_limit_integral() -> float:
    """(1/2pi) int_0^inf dt/(sqrt(t)(t+1)), the limit of V; equals 1/2"""
    value, _ = integrate.quad(lambda t: 1.0 / (math.sqrt(t) * (t + 1.0)), 0.0, np.inf)
    return value / (2.0 * math.pi)


# --- Asymptotic envelopes --------------------------------------------------
def lemma_u_check(values: Sequence[int] = (5, 10, 20, 40, 80), spec: QuadratureSpec = DEFAULT_SPEC,
                  constant: float = 2.0) -> pd.DataFrame:
    """U(k,l) against 1 - (1/k + 1/l - 1/(k+l))/12 within constant/min(k,l)^2"""
    rows = []
    for k in values:
        for l in values:  # noqa: E741
            u = u_factor(ParamPair(k, l), spec)
            approx = 1.0 - (1.0 / k + 1.0 / l - 1.0 / (k + l)) / 12.0
            envelope = constant / min(k, l) ** 2
            rows.append({"k": k, "l": l, "u": u, "approx": approx,
                         "abs_diff": abs(u - approx), "envelope": envelope})
    df = pd.DataFrame(rows)
    df["pass"] = df["abs_diff"] <= df["envelope"]
    return df


def c_nu_large_approx(nu: int, x: Fraction, printed_sign: bool = False) -> float:
    """1 + 1/(12nu(1+x)) - 1/(12nu x) - 1/(12nu); the last sign follows -mu(nu) in c_nu"""
    x = float(x)
    last = 1.0 if printed_sign else -1.0
    return 1.0 + 1.0 / (12 * nu * (1 + x)) - 1.0 / (12 * nu * x) + last / (12 * nu)


def lemma_c_check(nus: Sequence[int] = (10, 20, 40, 80), x: Fraction = Fraction(1),
                  spec: QuadratureSpec = DEFAULT_SPEC, constant: float = 2.0) -> pd.DataFrame:
    """c_nu(x) for nu*x >= 1 against its 1/nu expansion"""
    x = Fraction(x)
    rows = []
    for nu in nus:
        if nu * x < 1:
            raise DomainError(f"nu*x = {nu * x} < 1 is outside the large regime")
        c = c_nu(CNuArg(nu, x), spec)
        approx = c_nu_large_approx(nu, x)
        printed = c_nu_large_approx(nu, x, printed_sign=True)
        envelope = constant / (nu ** 2 * min(1.0, float(x) ** 2))
        rows.append({"nu": nu, "x": float(x), "c": c, "approx": approx,
                     "abs_diff": abs(c - approx), "abs_diff_printed": abs(c - printed),
                     "envelope": envelope})
    df = pd.DataFrame(rows)
    df["pass"] = df["abs_diff"] <= df["envelope"]
    return df


def lemma_c_small_check(nus: Iterable[int] = (1, 2, 5, 10),
                        products: Iterable[Fraction] = (Fraction(1, 1000), Fraction(1, 200), Fraction(1, 50)),
                        spec: QuadratureSpec = DEFAULT_SPEC, spread: float = 0.15):
    """c_nu(x)/sqrt(nu x) for nu*x <= 1 is near a constant K; returns (K, spread, passed, table)"""
    rows = []
    for nu in nus:
        for prod in products:
            prod = Fraction(prod)
            if prod > 1:
                raise DomainError(f"nu*x = {prod} > 1 is outside the small regime")
            x = prod / nu
            c = c_nu(CNuArg(nu, x), spec)
            rows.append({"nu": nu, "x": float(x), "c": c, "ratio": c / math.sqrt(float(prod))})
    df = pd.DataFrame(rows)
    k_est = float(df["ratio"].mean())
    observed = float((df["ratio"].max() - df["ratio"].min()) / k_est)
    return k_est, observed, observed <= spread, df


def lemma_v_check(pairs: Iterable[Tuple[int, int]], series_tol: float = 1e-8,
                  spec: QuadratureSpec = DEFAULT_SPEC, constant: float = 1.0) -> pd.DataFrame:
    """|V(k,l) - 1/2| against constant * (1/sqrt(k) + 1/sqrt(l))"""
    rows = []
    for k, l in pairs:  # noqa: E741
        v = v_factor(ParamPair(k, l), series_tol, spec).value
        envelope = constant * (1.0 / math.sqrt(k) + 1.0 / math.sqrt(l))
        rows.append({"k": k, "l": l, "v": v, "abs_diff": abs(v - 0.5), "envelope": envelope})
    df = pd.DataFrame(rows)
    df["pass"] = df["abs_diff"] <= df["envelope"]
    return df
