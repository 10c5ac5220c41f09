"""
binet.py
--------
The Binet function

    mu(x) = int_0^inf g(t) e^{-xt} dt,   g(t) = (1/t)(1/(e^t - 1) - 1/t + 1/2)

evaluated three ways:
- quadrature (Bernoulli-series head on [0, t_split], adaptive Gauss-Kronrod
  panels after it), the reference routine;
- the closed form log Gamma(x) - (x - 1/2) log x + x - log(2 pi)/2, used as an
  independent oracle;
- the asymptotic Stirling series, cheap and accurate for x >= 6.

`binet_mu` dispatches between the Stirling series and memoized quadrature and
is what the Raab factors are built from.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import integrate, special, stats

from meancut.errors import ConfigError, DomainError, QuadratureError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
HALF_LOG_TWO_PI = 0.5 * math.log(TWO_PI)
STIRLING_MIN = 6.0
STIRLING_TERMS = 12


@dataclass(frozen=True)
class QuadratureSpec:
    t_split: float = 1.0
    series_order: int = 12
    tol: float = 1e-10
    max_subdiv: int = 200

    def __post_init__(self):
        if not 0 < self.t_split < TWO_PI:
            raise ConfigError("t_split must lie in (0, 2*pi), the kernel series' radius")
        if self.series_order < 1:
            raise ConfigError("series_order must be >= 1")
        if not self.tol > 0:
            raise ConfigError("tol must be > 0")
        if self.max_subdiv < 1:
            raise ConfigError("max_subdiv must be >= 1")


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class BinetValue:
    mu: float
    err_est: float


# --- Kernel ----------------------------------------------------------------
@lru_cache(maxsize=None)
def _kernel_coefficients(order: int) -> np.ndarray:
    """B_{2n}/(2n)! for n = 1..order+1 (the last one bounds the truncation)"""
    b = special.bernoulli(2 * order + 2)
    n2 = np.arange(2, 2 * order + 3, 2)
    return b[n2] / special.factorial(n2, exact=False)


def _kernel_series(t, order: int):
    # g(t) = sum_{n>=1} B_{2n} t^{2n-2}/(2n)!, Horner in t^2
    coef = _kernel_coefficients(order)[:order]
    u = np.square(t)
    acc = np.zeros_like(u, dtype=float) + coef[-1]
    for c in coef[-2::-1]:
        acc = acc * u + c
    return acc


def _kernel_direct(t):
    # 1/(e^t - 1) written as e^{-t}/(1 - e^{-t}) so large t never overflows
    inv = np.exp(-t) / -np.expm1(-t)
    return (inv - 1.0 / t + 0.5) / t


def _kernel_scalar(t: float) -> float:
    inv = math.exp(-t) / -math.expm1(-t)
    return (inv - 1.0 / t + 0.5) / t


def binet_kernel(t, spec: QuadratureSpec = DEFAULT_SPEC):
    """g(t); series below t_split, closed formula above, g(0) = 1/12"""
    scalar = np.ndim(t) == 0
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(arr < 0):
        raise DomainError("binet_kernel is defined for t >= 0")
    small = arr < spec.t_split
    out = np.empty_like(arr)
    out[small] = _kernel_series(arr[small], spec.series_order)
    out[~small] = _kernel_direct(arr[~small])
    return float(out[0]) if scalar else out


# --- Quadrature ------------------------------------------------------------
def _head_moments(x: float, s: float, count: int) -> np.ndarray:
    """I_m = int_0^s t^m e^{-xt} dt for m = 0, 2, 4, ..., 2(count-1)"""
    m = np.arange(0, 2 * count, 2, dtype=float)
    if x * s <= 1.0:
        # power series in (-x s); no cancellation since |x s| <= 1
        out = np.zeros(count)
        term_scale = np.ones(count)
        for j in range(60):
            contrib = term_scale * s ** (m + j + 1) / (m + j + 1)
            out += contrib
            if np.all(np.abs(contrib) <= 1e-18 * np.abs(out)):
                break
            term_scale = term_scale * (-x) / (j + 1)
        return out
    # lower incomplete gamma: Gamma(m+1) P(m+1, xs) / x^(m+1)
    a = m + 1.0
    return np.exp(special.gammaln(a) - a * math.log(x)) * special.gammainc(a, x * s)


def _panel_edges(start: float, stop: float) -> List[float]:
    edges = [start]
    while edges[-1] * 2.0 < stop:
        edges.append(edges[-1] * 2.0)
    edges.append(stop)
    return edges


def binet_mu_quad(x, spec: QuadratureSpec = DEFAULT_SPEC) -> BinetValue:
    """mu(x) by Bernoulli-series head plus adaptive quadrature, any x > 0"""
    x = float(x)
    if not x > 0:
        raise DomainError(f"mu(x) requires x > 0, got {x!r}")
    s = spec.t_split
    coef = _kernel_coefficients(spec.series_order)
    moments = _head_moments(x, s, spec.series_order + 1)
    head = float(np.dot(coef[:-1], moments[:-1]))
    # alternating Bernoulli series: first omitted term bounds the truncation
    series_err = abs(coef[-1] * moments[-1])

    t_max = max(30.0, 40.0 / x)
    # g <= 1/12, so int_T^inf g e^{-xt} dt <= e^{-xT}/(12x)
    tail_err = math.exp(-x * t_max) / (12.0 * x)

    edges = _panel_edges(s, t_max)
    budget = max(spec.tol - series_err - tail_err, spec.tol / 10) / (2 * (len(edges) - 1))
    body, quad_err = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        res = integrate.quad(
            lambda t: _kernel_scalar(t) * math.exp(-x * t),
            a, b, epsabs=budget, epsrel=0.0, limit=spec.max_subdiv, full_output=1,
        )
        value, err, info = res[0], res[1], res[2]
        if len(res) > 3:
            logger.debug("quad panel [%g, %g] x=%g: %s", a, b, x, res[3])
            if info.get("last", 0) >= spec.max_subdiv:
                raise QuadratureError(
                    f"tolerance not reached: mu({x}) panel [{a}, {b}] used {spec.max_subdiv} subdivisions"
                )
        body += value
        quad_err += err
    err_est = series_err + tail_err + quad_err
    if err_est > spec.tol:
        raise QuadratureError(f"tolerance not reached: mu({x}) error {err_est:.3g} > {spec.tol:.3g}")
    return BinetValue(mu=head + body, err_est=err_est)


# --- Closed form and asymptotic series -------------------------------------
def binet_mu_gamma(x):
    """mu(x) = log Gamma(x) - (x - 1/2) log x + x - log(2 pi)/2"""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("mu(x) requires x > 0")
    out = special.gammaln(arr) - (arr - 0.5) * np.log(arr) + arr - HALF_LOG_TWO_PI
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def _stirling_coefficients(terms: int) -> np.ndarray:
    # B_{2n} / (2n (2n-1)) for n = 1..terms+1
    b = special.bernoulli(2 * terms + 2)
    n2 = np.arange(2, 2 * terms + 3, 2)
    return b[n2] / (n2 * (n2 - 1.0))


def binet_mu_stirling(x, terms: int = STIRLING_TERMS):
    """Asymptotic series sum_n B_{2n}/(2n(2n-1) x^(2n-1)); meant for x >= 6"""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("mu(x) requires x > 0")
    coef = _stirling_coefficients(terms)[:terms]
    inv2 = 1.0 / np.square(arr)
    acc = np.zeros_like(arr) + coef[-1]
    for c in coef[-2::-1]:
        acc = acc * inv2 + c
    out = acc / arr
    return out if out.ndim else float(out)


def stirling_error_bound(x, terms: int = STIRLING_TERMS):
    """Magnitude of the first omitted term, which bounds the error for real x > 0"""
    c = abs(_stirling_coefficients(terms)[terms])
    return c / np.power(np.asarray(x, dtype=float), 2 * terms + 1)


# --- Dispatch with memo cache ----------------------------------------------
@lru_cache(maxsize=None)
def _mu_quad_cached(key: Fraction, spec: QuadratureSpec) -> float:
    return binet_mu_quad(float(key), spec).mu


def binet_mu(x, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """mu(x): Stirling series for x >= 6, cached quadrature below"""
    xf = float(x)
    if not xf > 0:
        raise DomainError(f"mu(x) requires x > 0, got {x!r}")
    if xf >= STIRLING_MIN:
        return binet_mu_stirling(xf)
    key = x if isinstance(x, Fraction) else Fraction(xf)
    return _mu_quad_cached(key, spec)


def binet_mu_multiples(nus: np.ndarray, ratio: Fraction,
                       spec: QuadratureSpec = DEFAULT_SPEC) -> np.ndarray:
    """mu(nu * ratio) for an integer array nus; small arguments keep exact cache keys"""
    nus = np.asarray(nus, dtype=np.int64)
    ratio = Fraction(ratio)
    values = nus * float(ratio)
    out = np.empty(values.shape, dtype=float)
    big = values >= STIRLING_MIN
    out[big] = binet_mu_stirling(values[big])
    for i in np.flatnonzero(~big):
        out[i] = binet_mu(int(nus[i]) * ratio, spec)
    return out


def clear_cache() -> None:
    _mu_quad_cached.cache_clear()


# --- Asymptotic regimes ----------------------------------------------------
@dataclass
class LemmaIntegralsReport:
    table: pd.DataFrame
    large_x_exponent: Optional[float] = None
    small_x_log_coefficient: Optional[float] = None
    small_x_constant: Optional[float] = None
    violations: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def _fit_small_x_constant(xs: np.ndarray, shifted: np.ndarray) -> float:
    # shifted(x) = C + a x log x + b x + O(x^2)
    if len(xs) < 3:
        return float(shifted[np.argmin(xs)])
    design = np.column_stack([np.ones_like(xs), xs * np.log(xs), xs])
    coef, *_ = np.linalg.lstsq(design, shifted, rcond=None)
    return float(coef[0])


def lemma_integrals_check(x_grid: Sequence[float], spec: QuadratureSpec = DEFAULT_SPEC,
                          drift_constant: float = 2.0) -> LemmaIntegralsReport:
    """Check mu(x) ~ 1/(12x) for large x and mu(x) ~ -log(x)/2 + C for small x"""
    xs = np.array(sorted(float(v) for v in x_grid))
    if xs.size == 0 or np.any(xs <= 0):
        raise DomainError("x_grid must be a nonempty list of positive reals")
    mu = np.array([binet_mu_quad(v, spec).mu for v in xs])
    table = pd.DataFrame({
        "x": xs,
        "mu": mu,
        "twelve_x_mu": 12.0 * xs * mu,
        "residual": np.abs(mu - 1.0 / (12.0 * xs)),
        "shifted": mu + 0.5 * np.log(xs),
    })
    report = LemmaIntegralsReport(table=table)

    large = table[table["x"] >= 1.0]
    for row in large.itertuples():
        if not 0.0 < row.twelve_x_mu <= 1.0:
            report.violations.append(f"12x*mu(x) = {row.twelve_x_mu:.6g} outside (0, 1] at x={row.x:g}")
    if len(large) >= 2:
        fit = stats.linregress(np.log(large["x"]), np.log(large["residual"]))
        report.large_x_exponent = float(fit.slope)
        if fit.slope > -1.8:
            report.violations.append(f"large-x residual exponent {fit.slope:.3f} > -1.8")

    small = table[table["x"] < 1.0]
    if len(small) >= 2:
        fit = stats.linregress(np.log(small["x"]), small["mu"])
        report.small_x_log_coefficient = float(fit.slope)
        constant = _fit_small_x_constant(small["x"].to_numpy(), small["shifted"].to_numpy())
        report.small_x_constant = constant
        for row in small.itertuples():
            envelope = drift_constant * row.x * (1.0 + abs(math.log(row.x)))
            if abs(row.shifted - constant) > envelope:
                report.violations.append(
                    f"small-x drift {abs(row.shifted - constant):.3g} exceeds {envelope:.3g} at x={row.x:g}"
                )
        if fit.slope > 0:
            report.violations.append(f"small-x log coefficient {fit.slope:.3f} is positive")
    return report
