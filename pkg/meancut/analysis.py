"""
analysis.py
-----------
Limits, bounds and error exponents of P(k, l):

- the three approximants (Poisson lower tail for small k, Poisson upper tail
  for small l, the constant 1/2 in general) and their limit values;
- log-log fits of the approximation error against the varying parameter;
- the 1/4 <= P <= 1/2 scan, the corollary bound for l -> infinity;
- the verification suites that `meancut verify` runs.
"""

import enum
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy import special, stats

from meancut import binet, raab
from meancut.config import Settings
from meancut.errors import DomainError, MeanCutError, RegimeError
from meancut.exact_core import (
    ParamPair,
    exact_p,
    exact_swap_defect,
    karamata_check,
    _check_positive_int,
)
from meancut.float_eval import log_p, poisson_mode_term, poisson_tail, poisson_upper

logger = logging.getLogger(__name__)


class ApproxKind(enum.Enum):
    POISSON_LOWER = "eq1"
    POISSON_UPPER = "eq2"
    HALF = "eq3"


# exponent stated by the theorem, and the exponent the error actually has
CLAIMED_SLOPE = {ApproxKind.POISSON_LOWER: -1.0, ApproxKind.POISSON_UPPER: -1.0, ApproxKind.HALF: -0.5}
SHARP_SLOPE = {ApproxKind.POISSON_LOWER: -1.0, ApproxKind.POISSON_UPPER: -2.0, ApproxKind.HALF: -0.5}
DIAGONAL_INTERCEPT = math.log(1.0 / (2.0 * math.sqrt(math.pi)))

_warned_printed_index = False


# --- Approximants and limits -----------------------------------------------
def approximant(p: ParamPair, kind: ApproxKind) -> float:
    if not isinstance(p, ParamPair):
        p = ParamPair(*p)
    kind = ApproxKind(kind)
    if kind is ApproxKind.POISSON_LOWER:
        return poisson_tail(p.k)
    if kind is ApproxKind.POISSON_UPPER:
        return poisson_upper(p.l)
    return 0.5


def accumulation_limit(kind: ApproxKind, n: Optional[int] = None) -> float:
    """Limit of P along l -> inf (eq1, n = k), k -> inf (eq2, n = l), or both (eq3)"""
    global _warned_printed_index
    kind = ApproxKind(kind)
    if kind is ApproxKind.HALF:
        return 0.5
    if not _warned_printed_index:
        logger.warning("accumulation points use inner sums from nu=0; the nu=1 variant is reported separately")
        _warned_printed_index = True
    n = _check_positive_int("n", n)
    return poisson_tail(n) if kind is ApproxKind.POISSON_LOWER else poisson_upper(n)


def accumulation_limit_printed(kind: ApproxKind, n: int) -> float:
    """Same limits with the inner sums started at nu = 1"""
    kind = ApproxKind(kind)
    if kind is ApproxKind.HALF:
        return 0.5
    n = _check_positive_int("n", n)
    if kind is ApproxKind.POISSON_LOWER:
        return poisson_tail(n) - math.exp(-n)
    return poisson_upper(n) + math.exp(-n)


def oracle_p(p: ParamPair, switchover: int = 2000) -> float:
    """Exact value where affordable, log-space float beyond"""
    if not isinstance(p, ParamPair):
        p = ParamPair(*p)
    return float(exact_p(p)) if p.n <= switchover else log_p(p)


def _approx_error(p: ParamPair, kind: ApproxKind, switchover: int) -> float:
    approx = approximant(p, kind)
    if p.n <= switchover:
        # difference taken exactly so tiny errors keep their digits
        return float(abs(exact_p(p) - Fraction(approx)))
    return abs(log_p(p) - approx)


# --- Error exponent fits ---------------------------------------------------
@dataclass
class FitResult:
    kind: ApproxKind
    fixed_param: Optional[int]
    slope: float
    intercept: float
    r2: float
    points: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def n_points(self) -> int:
        return len(self.points)

    def decays_as_claimed(self, window: float = 0.15) -> bool:
        return self.slope <= CLAIMED_SLOPE[self.kind] + window

    def passed(self, window: float = 0.15, r2_min: float = 0.98) -> bool:
        ok = abs(self.slope - SHARP_SLOPE[self.kind]) <= window and self.r2 >= r2_min
        if self.kind is ApproxKind.HALF:
            ok = ok and abs(self.intercept - DIAGONAL_INTERCEPT) <= 0.1
        return ok


def _grid_pairs(kind: ApproxKind, fixed_param: Optional[int], grid: Sequence[int]) -> List[ParamPair]:
    if kind is ApproxKind.POISSON_LOWER:
        k = _check_positive_int("k", fixed_param)
        bad = [v for v in grid if not k * k < v]
        if bad:
            raise RegimeError(f"grid violates k^2 < l (k={k}, l={bad[0]})")
        return [ParamPair(k, v) for v in grid]
    if kind is ApproxKind.POISSON_UPPER:
        l = _check_positive_int("l", fixed_param)  # noqa: E741
        bad = [v for v in grid if not l * l < v]
        if bad:
            raise RegimeError(f"grid violates l^2 < k (l={l}, k={bad[0]})")
        return [ParamPair(v, l) for v in grid]
    return [ParamPair(v, v) for v in grid]


def error_fit(kind: ApproxKind, fixed_param: Optional[int], grid: Sequence[int],
              switchover: int = 2000, n_jobs: int = 1) -> FitResult:
    """Least-squares slope of log|P - approximant| against log(varying parameter)"""
    kind = ApproxKind(kind)
    grid = [int(v) for v in grid]
    pairs = _grid_pairs(kind, fixed_param, grid)
    if len(grid) < 4:
        raise DomainError(f"error_fit needs at least 4 grid points, got {len(grid)}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("error_fit grid must be strictly increasing")
    errors = Parallel(n_jobs=n_jobs)(delayed(_approx_error)(p, kind, switchover) for p in pairs)
    if min(errors) <= 0:
        raise DomainError("approximation error vanished on the grid; cannot take logs")
    log_x = np.log(np.asarray(grid, dtype=float))
    log_e = np.log(np.asarray(errors, dtype=float))
    fit = stats.linregress(log_x, log_e)
    return FitResult(
        kind=kind,
        fixed_param=None if kind is ApproxKind.HALF else int(fixed_param),
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r2=float(fit.rvalue ** 2),
        points=list(zip(log_x.tolist(), log_e.tolist())),
    )


CANONICAL_FITS = [
    (ApproxKind.POISSON_LOWER, 2, [100, 200, 400, 800, 1600]),
    (ApproxKind.POISSON_UPPER, 1, [100, 200, 400, 800]),
    (ApproxKind.HALF, None, [25, 50, 100, 200, 400]),
]


# --- Bounds ----------------------------------------------------------------
@dataclass(frozen=True)
class BoundViolation:
    k: int
    l: int  # noqa: E741
    method: str
    value: float
    bound: float


_QUARTER, _HALF = Fraction(1, 4), Fraction(1, 2)


def _exact_row_violations(k: int, lmax: int) -> List[BoundViolation]:
    out = []
    for l in range(1, lmax + 1):  # noqa: E741
        value = exact_p(ParamPair(k, l))
        if value < _QUARTER:
            out.append(BoundViolation(k, l, "exact", float(value), 0.25))
        elif value > _HALF:
            out.append(BoundViolation(k, l, "exact", float(value), 0.5))
    return out


def _float_row_violations(k: int, lmax: int, skip_upto: int, margin: float) -> List[BoundViolation]:
    out = []
    for l in range(1, lmax + 1):  # noqa: E741
        if k <= skip_upto and l <= skip_upto:
            continue
        value = log_p(ParamPair(k, l))
        if value < 0.25 - margin:
            out.append(BoundViolation(k, l, "float", value, 0.25))
        elif value > 0.5 + margin:
            out.append(BoundViolation(k, l, "float", value, 0.5))
    return out


def bounds_scan(kmax: int, lmax: int, exact_max: int = 60, margin: float = 1e-9,
                n_jobs: int = 1) -> List[BoundViolation]:
    """1/4 <= P <= 1/2: exact on [1, exact_max]^2, log_p with a margin elsewhere"""
    kmax = _check_positive_int("kmax", kmax)
    lmax = _check_positive_int("lmax", lmax)
    exact_k = min(kmax, exact_max)
    exact_l = min(lmax, exact_max)
    rows = Parallel(n_jobs=n_jobs)(delayed(_exact_row_violations)(k, exact_l) for k in range(1, exact_k + 1))
    rows += Parallel(n_jobs=n_jobs)(
        delayed(_float_row_violations)(k, lmax, exact_max, margin) for k in range(1, kmax + 1)
    )
    return sorted((v for row in rows for v in row), key=lambda v: (v.k, v.l))


# --- Corollary 2 -----------------------------------------------------------
@dataclass(frozen=True)
class Corollary2Check:
    observed: float
    bound: float
    margin: float


def corollary2_check(k: int, big_l: int) -> Corollary2Check:
    """log_p(k, L) for L >> k^2 against 1/2 - 1/sqrt(2 pi k)"""
    k = _check_positive_int("k", k)
    big_l = _check_positive_int("big_l", big_l)
    if big_l < 100 * k * k:
        raise DomainError(f"big_l must be >= 100*k^2 = {100 * k * k}, got {big_l}")
    observed = log_p(ParamPair(k, big_l))
    bound = 0.5 - 1.0 / math.sqrt(2.0 * math.pi * k)
    return Corollary2Check(observed, bound, observed - bound)


def corollary2_limit_identity(m: int) -> float:
    """|poisson_tail(m) + poisson_upper(m) + e^-m m^m/m! - 1|"""
    return abs(poisson_tail(m) + poisson_upper(m) + poisson_mode_term(m) - 1.0)


def stirling_step(k: int) -> bool:
    """e^-k k^k/k! <= 1/sqrt(2 pi k), the Stirling step of the corollary"""
    return poisson_mode_term(k) <= 1.0 / math.sqrt(2.0 * math.pi * k)


def diagonal_gap(n: int) -> Tuple[Fraction, float]:
    """1/2 - P(n, n) = C(2n, n)/2^(2n+1) exactly, and its Stirling form 1/(2 sqrt(pi n))"""
    n = _check_positive_int("n", n)
    return Fraction(comb(2 * n, n), 2 ** (2 * n + 1)), 1.0 / (2.0 * math.sqrt(math.pi * n))


# --- Verification suites ---------------------------------------------------
@dataclass
class SuiteResult:
    name: str
    passed: bool
    n_checks: int
    n_failed: int
    detail: str = ""
    seconds: float = 0.0


def _result(name: str, failures: List[str], n_checks: int, extra: str = "") -> SuiteResult:
    detail = "; ".join(failures[:5]) if failures else extra
    return SuiteResult(name, not failures, n_checks, len(failures), detail)


def suite_exact(settings: Settings, kmax: int, lmax: int) -> SuiteResult:
    expected = {
        (1, 1): Fraction(1, 4),
        (2, 2): Fraction(5, 16),
        (3, 5): Fraction(6203125, 16777216),
    }
    defects = {(1, 1): Fraction(1, 2), (2, 2): Fraction(3, 8), (1, 2): Fraction(4, 9)}
    failures = [f"P{kl}={exact_p(ParamPair(*kl))}" for kl, v in expected.items() if exact_p(ParamPair(*kl)) != v]
    failures += [f"D{kl}" for kl, v in defects.items() if exact_swap_defect(ParamPair(*kl)) != v]
    return _result("exact", failures, len(expected) + len(defects))


def suite_swap(settings: Settings, kmax: int, lmax: int) -> SuiteResult:
    failures, checks = [], 0
    for k in range(1, kmax + 1):
        for l in range(1, lmax + 1):  # noqa: E741
            p = ParamPair(k, l)
            checks += 1
            if exact_p(p) + exact_p(p.swapped()) + exact_swap_defect(p) != 1:
                failures.append(f"swap({k},{l})")
    for n in range(1, min(kmax, lmax) + 1):
        checks += 1
        gap, _ = diagonal_gap(n)
        if exact_p(ParamPair(n, n)) != Fraction(1, 2) - gap:
            failures.append(f"diag({n})")
    return _result("swap", failures, checks)


def suite_bounds(settings: Settings, kmax: int, lmax: int) -> SuiteResult:
    violations = bounds_scan(kmax, lmax, settings.exact_scan_max, settings.float_margin, settings.n_jobs)
    failures = [f"P({v.k},{v.l})={v.value:.12g} vs {v.bound}" for v in violations]
    checks = kmax * lmax
    if exact_p(ParamPair(1, 1)) != Fraction(1, 4):
        failures.append("P(1,1) != 1/4")
    return _result("bounds", failures, checks + 1)


def suite_float(settings: Settings, kmax: int, lmax: int) -> SuiteResult:
    failures, checks = [], 0
    for k in range(1, kmax + 1):
        for l in range(1, lmax + 1):  # noqa: E741
            p = ParamPair(k, l)
            exact = float(exact_p(p))
            checks += 1
            if abs(log_p(p) - exact) > 1e-12 * exact:
                failures.append(f"log_p({k},{l})")
            if k <= l:
                checks += 1
                total = log_p(p) + log_p(p.swapped()) + float(exact_swap_defect(p))
                if abs(total - 1.0) > 1e-10:
                    failures.append(f"symmetry({k},{l})")
    for m in range(1, 171):
        checks += 1
        # scipy's Poisson CDF as an independent reference
        if abs(poisson_tail(m) - special.pdtr(m - 1, m)) > 1e-10 * poisson_tail(m):
            failures.append(f"poisson_tail({m})")
    return _result("float", failures, checks)


BINET_POINTS = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1000.0)
SMALL_X_LIMIT = -0.5 * math.log(2.0 * math.pi)


def suite_binet(settings: Settings, kmax: int, lmax: int) -> SuiteResult:
    spec = settings.quadrature_spec()
    failures = []
    previous = math.inf
    for x in BINET_POINTS:
        q = binet.binet_mu_quad(x, spec).mu
        if abs(q - binet.binet_mu_gamma(x)) > 1e-9:
            failures.append(f"mu({x}) quad/gamma mismatch")
        if not 0.0 < q < 1.0 / (12.0 * x):
            failures.append(f"mu({x}) outside (0, 1/(12x))")
        if not q < previous:
            failures.append(f"mu not decreasing at {x}")
        previous = q
    ts = np.linspace(1e-3, 100.0, 2001)
    g = binet.binet_kernel(ts, spec)
    if not (np.all(g > 0) and np.all(g <= 1.0 / 12.0)):
        failures.append("kernel outside (0, 1/12]")
    return _result("binet", failures, 3 * len(BINET_POINTS) + 1)


def suite_lemma_integrals(settings: Settings, kmax: int, lmax: int) -> SuiteResult:
    spec = settings.quadrature_spec()
    report = binet.lemma_integrals_check([10.0, 20.0, 40.0, 80.0, 0.1, 0.01, 0.001], spec)
    failures = list(report.violations)
    for row in report.table[report.table["x"] >= 10].itertuples():
        if not 0.99 <= row.twelve_x_mu <= 1.0:
            failures.append(f"12x*mu({row.x:g})={row.twelve_x_mu:.6f}")
    # mu(x) + log(x)/2 -> -log(2 pi)/2 as x -> 0
    if report.small_x_constant is None or abs(report.small_x_constant - SMALL_X_LIMIT) > 0.01:
        failures.append(f"small-x constant {report.small_x_constant} != {SMALL_X_LIMIT:.6f}")
    extra = (f"exponent={report.large_x_exponent:.3f} log_coef={report.small_x_log_coefficient:.3f} "
             f"C={report.small_x_constant:.6f}")
    return _result("lemma-integrals", failures, len(report.table) + 2, extra)


def _raab_error(k: int, l: int, series_tol: float, spec, tail: str, cap: int, c_max: float) -> float:  # noqa: E741
    p = ParamPair(k, l)
    res = raab.raab_p(p, series_tol, spec, tail=tail, cap=cap, c_max=c_max)
    return abs(res.p - float(exact_p(p)))


def suite_raab(settings: Settings, kmax: int, lmax: int) -> SuiteResult:
    spec = settings.quadrature_spec()
    pairs = [(k, l) for k in range(1, kmax + 1) for l in range(1, lmax + 1)]  # noqa: E741
    errs = Parallel(n_jobs=settings.n_jobs)(
        delayed(_raab_error)(k, l, settings.series_tol, spec, settings.tail_mode,
                             settings.series_cap, settings.c_max)
        for k, l in pairs  # noqa: E741
    )
    failures = [f"raab({k},{l}) err={e:.3g}" for (k, l), e in zip(pairs, errs) if e > 1e-6]  # noqa: E741
    return _result("raab", failures, len(pairs), f"max_err={max(errs):.3g}")


def suite_lemma_u(settings: Settings, kmax: int, lmax: int) -> SuiteResult:
    df = raab.lemma_u_check(spec=settings.quadrature_spec())
    failures = [f"U({int(k)},{int(l)})" for k, l, ok in zip(df["k"], df["l"], df["pass"]) if not ok]  # noqa: E741
    return _result("lemma-u", failures, len(df))


def suite_lemma_c(settings: Settings, kmax: int, lmax: int) -> SuiteResult:
    spec = settings.quadrature_spec()
    large = raab.lemma_c_check(spec=spec)
    failures = [f"c_{int(nu)}(1)" for nu, ok in zip(large["nu"], large["pass"]) if not ok]
    k_est, spread, ok, small = raab.lemma_c_small_check(spec=spec)
    if not ok:
        failures.append(f"small-regime spread {spread:.3f}")
    return _result("lemma-c", failures, len(large) + 1, f"K={k_est:.6f} spread={spread:.3f}")


def suite_lemma_v(settings: Settings, kmax: int, lmax: int) -> SuiteResult:
    pairs = [(n, n) for n in (1, 4, 16, 64, 100)] + [(1, 50), (50, 1)]
    df = raab.lemma_v_check(pairs, settings.series_tol, settings.quadrature_spec())
    failures = [f"V({int(k)},{int(l)})" for k, l, ok in zip(df["k"], df["l"], df["pass"]) if not ok]  # noqa: E741
    limit = raab.v_limit_integral()
    if abs(limit - 0.5) > 1e-10:
        failures.append(f"V limit integral {limit}")
    return _result("lemma-v", failures, len(df) + 1)


def suite_karamata(settings: Settings, kmax: int, lmax: int) -> SuiteResult:
    failures = []
    for l in range(1, lmax + 1):  # noqa: E741
        lower, upper = karamata_check(l, settings.karamata_max_depth)
        if not (lower and upper):
            failures.append(f"l={l} ({lower},{upper})")
    return _result("karamata", failures, lmax)


def suite_theorem1(settings: Settings, kmax: int, lmax: int) -> SuiteResult:
    failures, notes = [], []
    for kind, fixed, grid in CANONICAL_FITS:
        fit = error_fit(kind, fixed, grid, settings.exact_switchover, settings.n_jobs)
        notes.append(f"{kind.value}:slope={fit.slope:.3f},r2={fit.r2:.4f}")
        if not fit.passed(settings.slope_window, settings.r2_min):
            failures.append(f"{kind.value} slope={fit.slope:.3f} r2={fit.r2:.4f}")
        elif not fit.decays_as_claimed(settings.slope_window):
            failures.append(f"{kind.value} decays slower than claimed")
    return _result("theorem1", failures, len(CANONICAL_FITS), " ".join(notes))


def suite_corollary1(settings: Settings, kmax: int, lmax: int) -> SuiteResult:
    failures, notes = [], []
    big = 10 ** 6
    for n in (1, 2, 3):
        for kind, pair in ((ApproxKind.POISSON_LOWER, ParamPair(n, big)),
                           (ApproxKind.POISSON_UPPER, ParamPair(big, n))):
            value = log_p(pair)
            gap = abs(value - accumulation_limit(kind, n))
            printed_gap = abs(value - accumulation_limit_printed(kind, n))
            notes.append(f"{kind.value}({n}):gap={gap:.2g},printed_gap={printed_gap:.2g}")
            if gap > 10.0 * n * n / big:
                failures.append(f"{kind.value}({n}) gap={gap:.3g}")
    return _result("corollary1", failures, 6, " ".join(notes))


def suite_corollary2(settings: Settings, kmax: int, lmax: int) -> SuiteResult:
    failures = []
    for m in range(1, 101):
        if corollary2_limit_identity(m) > 1e-12:
            failures.append(f"identity m={m}")
        if not stirling_step(m):
            failures.append(f"stirling m={m}")
    for k in range(1, 11):
        check = corollary2_check(k, 100 * k * k * 100)
        if not check.margin > 0:
            failures.append(f"margin k={k} {check.margin:.3g}")
    return _result("corollary2", failures, 210)


SUITES: Dict[str, Callable[[Settings, int, int], SuiteResult]] = {
    "exact": suite_exact,
    "swap": suite_swap,
    "bounds": suite_bounds,
    "float": suite_float,
    "binet": suite_binet,
    "lemma-integrals": suite_lemma_integrals,
    "raab": suite_raab,
    "lemma-u": suite_lemma_u,
    "lemma-c": suite_lemma_c,
    "lemma-v": suite_lemma_v,
    "karamata": suite_karamata,
    "theorem1": suite_theorem1,
    "corollary1": suite_corollary1,
    "corollary2": suite_corollary2,
}


def run_suites(names: Iterable[str], settings: Settings, kmax: int = 30, lmax: int = 30) -> List[SuiteResult]:
    """Run the named suites; a numeric failure inside a suite fails that suite only"""
    names = list(SUITES) if "all" in names else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise DomainError(f"unknown suite: {unknown[0]}")
    results = []
    for name in names:
        start = time.perf_counter()
        try:
            result = SUITES[name](settings, kmax, lmax)
        except MeanCutError as exc:
            logger.error("suite %s raised %s", name, exc)
            result = SuiteResult(name, False, 0, 1, f"{type(exc).__name__}: {exc}")
        result.seconds = time.perf_counter() - start
        results.append(result)
    return results
