import logging
import math
from fractions import Fraction

import numpy as np
import pytest

from meancut import analysis
from meancut.analysis import (
    ApproxKind,
    BoundViolation,
    accumulation_limit,
    accumulation_limit_printed,
    approximant,
    bounds_scan,
    corollary2_check,
    corollary2_limit_identity,
    diagonal_gap,
    error_fit,
    run_suites,
    stirling_step,
)
from meancut.config import Settings
from meancut.errors import DomainError, QuadratureError, RegimeError
from meancut.exact_core import ParamPair, exact_p
from meancut.float_eval import poisson_tail, poisson_upper


def test_approximants_at_one_one():
    p = ParamPair(1, 1)
    assert approximant(p, ApproxKind.POISSON_LOWER) == pytest.approx(math.exp(-1))
    assert approximant(p, ApproxKind.POISSON_UPPER) == pytest.approx(1 - 2 * math.exp(-1))
    assert approximant(p, ApproxKind.HALF) == 0.5
    assert approximant((1, 1), "eq3") == 0.5


def test_accumulation_limits():
    assert accumulation_limit(ApproxKind.HALF) == 0.5
    assert accumulation_limit(ApproxKind.POISSON_LOWER, 3) == poisson_tail(3)
    assert accumulation_limit(ApproxKind.POISSON_UPPER, 3) == poisson_upper(3)
    with pytest.raises(DomainError):
        accumulation_limit(ApproxKind.POISSON_LOWER, 0)


def test_printed_limits_differ_by_first_term():
    for n in (1, 2, 5):
        lower = accumulation_limit(ApproxKind.POISSON_LOWER, n) - accumulation_limit_printed(ApproxKind.POISSON_LOWER, n)
        upper = accumulation_limit_printed(ApproxKind.POISSON_UPPER, n) - accumulation_limit(ApproxKind.POISSON_UPPER, n)
        np.testing.assert_allclose([lower, upper], [math.exp(-n)] * 2, rtol=1e-12)


def test_printed_index_warning_is_logged_once(monkeypatch, caplog):
    monkeypatch.setattr(analysis, "_warned_printed_index", False)
    with caplog.at_level(logging.WARNING, logger="meancut.analysis"):
        accumulation_limit(ApproxKind.POISSON_LOWER, 2)
        accumulation_limit(ApproxKind.POISSON_UPPER, 2)
    assert sum("nu=0" in r.getMessage() for r in caplog.records) == 1


def test_limits_reached_at_large_parameters():
    big = 10 ** 6
    for n in (1, 2, 3):
        lower = analysis.log_p(ParamPair(n, big))
        assert abs(lower - accumulation_limit(ApproxKind.POISSON_LOWER, n)) <= 10 * n * n / big
        # the nu=1 variant stays e^-n away
        assert abs(lower - accumulation_limit_printed(ApproxKind.POISSON_LOWER, n)) > 0.5 * math.exp(-n)
        upper = analysis.log_p(ParamPair(big, n))
        assert abs(upper - accumulation_limit(ApproxKind.POISSON_UPPER, n)) <= 10 * n * n / big
        assert abs(upper - accumulation_limit_printed(ApproxKind.POISSON_UPPER, n)) > 0.5 * math.exp(-n)


def test_corollary1_suite_passes():
    (result,) = run_suites(["corollary1"], Settings())
    assert result.passed, result.detail


def test_fit_poisson_lower():
    fit = error_fit(ApproxKind.POISSON_LOWER, 2, [100, 200, 400, 800, 1600])
    assert -1.15 <= fit.slope <= -0.85
    assert fit.r2 >= 0.98
    assert fit.passed()
    assert fit.n_points == 5


def test_fit_poisson_upper_decays_like_inverse_square():
    # the first-order correction vanishes when the cut equals the Poisson mean
    fit = error_fit(ApproxKind.POISSON_UPPER, 1, [100, 200, 400, 800])
    assert -2.15 <= fit.slope <= -1.85
    assert fit.passed()
    assert fit.decays_as_claimed()


def test_fit_diagonal():
    fit = error_fit(ApproxKind.HALF, None, [25, 50, 100, 200, 400])
    assert -0.6 <= fit.slope <= -0.4
    assert abs(fit.intercept - math.log(1 / (2 * math.sqrt(math.pi)))) <= 0.1
    assert fit.fixed_param is None
    assert fit.passed()


def test_fit_uses_float_oracle_past_switchover():
    exact = error_fit(ApproxKind.HALF, None, [25, 50, 100, 200])
    floating = error_fit(ApproxKind.HALF, None, [25, 50, 100, 200], switchover=10)
    np.testing.assert_allclose(floating.slope, exact.slope, rtol=1e-8)


def test_fit_regime_guard():
    with pytest.raises(RegimeError, match=r"grid violates k\^2 < l"):
        error_fit(ApproxKind.POISSON_LOWER, 50, list(range(100, 201)))
    with pytest.raises(RegimeError, match=r"grid violates l\^2 < k"):
        error_fit(ApproxKind.POISSON_UPPER, 20, [100, 200, 400, 800])


def test_fit_regime_checked_before_length():
    with pytest.raises(RegimeError):
        error_fit(ApproxKind.POISSON_LOWER, 50, [100, 200])


def test_fit_grid_shape():
    with pytest.raises(DomainError, match="at least 4"):
        error_fit(ApproxKind.POISSON_LOWER, 2, [100, 200, 400])
    with pytest.raises(DomainError, match="strictly increasing"):
        error_fit(ApproxKind.POISSON_LOWER, 2, [100, 400, 200, 800])


def test_bounds_scan_clean():
    assert bounds_scan(25, 25, exact_max=12) == []


def test_bounds_scan_reports_float_violations(monkeypatch):
    monkeypatch.setattr(analysis, "log_p", lambda p: 0.6)
    violations = bounds_scan(3, 3, exact_max=2)
    assert [(v.k, v.l) for v in violations] == [(1, 3), (2, 3), (3, 1), (3, 2), (3, 3)]
    assert violations[0] == BoundViolation(1, 3, "float", 0.6, 0.5)


def test_corollary2_check():
    check = corollary2_check(2, 40_000)
    assert check.bound == pytest.approx(0.5 - 1 / math.sqrt(4 * math.pi))
    assert check.margin > 0
    assert check.observed == pytest.approx(poisson_tail(2), abs=1e-3)
    with pytest.raises(DomainError):
        corollary2_check(2, 399)


def test_corollary2_limit_identity():
    assert max(corollary2_limit_identity(m) for m in range(1, 101)) <= 1e-12


def test_stirling_step():
    assert all(stirling_step(k) for k in range(1, 200))


def test_diagonal_gap():
    gap, approx = diagonal_gap(1)
    assert gap == Fraction(1, 4)
    assert approx == pytest.approx(1 / (2 * math.sqrt(math.pi)))
    for n in (2, 10, 40):
        gap, approx = diagonal_gap(n)
        assert exact_p(ParamPair(n, n)) == Fraction(1, 2) - gap
        assert float(gap) < approx


def test_run_suites_small():
    results = run_suites(["exact", "swap", "karamata", "corollary2"], Settings(), kmax=10, lmax=10)
    assert [r.name for r in results] == ["exact", "swap", "karamata", "corollary2"]
    assert all(r.passed for r in results), [r.detail for r in results]
    assert all(r.n_failed == 0 and r.n_checks > 0 for r in results)


def test_run_suites_unknown_name():
    with pytest.raises(DomainError, match="unknown suite"):
        run_suites(["bogus"], Settings())


def test_run_suites_catches_numeric_failure(monkeypatch):
    def broken(settings, kmax, lmax):
        raise QuadratureError("tolerance not reached")

    monkeypatch.setitem(analysis.SUITES, "binet", broken)
    (result,) = run_suites(["binet"], Settings())
    assert not result.passed
    assert "QuadratureError" in result.detail


@pytest.mark.slow
def test_run_all_suites():
    results = run_suites(["all"], Settings(), kmax=30, lmax=30)
    assert len(results) == len(analysis.SUITES)
    assert all(r.passed for r in results), [(r.name, r.detail) for r in results if not r.passed]
