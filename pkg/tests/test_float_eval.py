import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meancut.errors import DomainError, EnvelopeWarning
from meancut.exact_core import ParamPair, exact_p, exact_swap_defect
from meancut.float_eval import (
    LogReal,
    ScaledSum,
    log_p,
    log_p_logreal,
    poisson_mode_term,
    poisson_tail,
    poisson_upper,
    scaled_series,
)


@given(st.integers(min_value=1, max_value=250), st.integers(min_value=1, max_value=250))
@settings(max_examples=80, deadline=None)
def test_log_p_matches_exact(k, l):  # noqa: E741
    p = ParamPair(k, l)
    exact = float(exact_p(p))
    np.testing.assert_allclose(log_p(p), exact, rtol=1e-12)


def test_log_p_small_grid_symmetry():
    for k in range(1, 21):
        for l in range(k, 21):  # noqa: E741
            p = ParamPair(k, l)
            total = log_p(p) + log_p(p.swapped()) + float(exact_swap_defect(p))
            assert abs(total - 1.0) <= 1e-10


def test_log_p_diagonal_far_beyond_exact():
    n = 5000
    gap = math.exp(math.lgamma(2 * n + 1) - 2 * math.lgamma(n + 1) - (2 * n + 1) * math.log(2))
    np.testing.assert_allclose(log_p(ParamPair(n, n)), 0.5 - gap, rtol=1e-9)


def test_log_p_k_one_huge_l():
    n = 10 ** 7 + 1
    with mpmath.workdps(30):
        expected = float((1 - mpmath.mpf(1) / n) ** n)
    np.testing.assert_allclose(log_p(ParamPair(1, 10 ** 7)), expected, rtol=1e-8)


def binomial_cut_mp(k, l):  # noqa: E741
    # P(k, l) = 1 - sum_{j<=l} C(n, j) (l/n)^j (k/n)^(n-j), evaluated at 50 digits
    n = k + l
    with mpmath.workdps(50):
        upper = mpmath.fsum(mpmath.binomial(n, j) * (mpmath.mpf(l) / n) ** j * (mpmath.mpf(k) / n) ** (n - j)
                            for j in range(l + 1))
        return float(1 - upper)


@pytest.mark.parametrize("k, l", [(10 ** 3, 1), (10 ** 5, 1), (10 ** 6, 1), (10 ** 6, 3), (10 ** 7, 2)])
def test_log_p_large_k_small_l(k, l):  # noqa: E741
    np.testing.assert_allclose(log_p(ParamPair(k, l)), binomial_cut_mp(k, l), rtol=1e-9)


def test_log_p_large_k_moderate_l_matches_exact():
    for k, l in [(300, 7), (1500, 40), (1999, 1)]:  # noqa: E741
        p = ParamPair(k, l)
        np.testing.assert_allclose(log_p(p), float(exact_p(p)), rtol=1e-12)


def test_log_p_warns_beyond_envelope():
    with pytest.warns(EnvelopeWarning):
        value = log_p_logreal(ParamPair(1, 10 ** 8))
    assert value.sign == 1
    np.testing.assert_allclose(value.to_float(), math.exp(-1), rtol=1e-6)


def test_log_p_domain():
    with pytest.raises(DomainError):
        log_p((0, 4))


def test_logreal_basics():
    zero = LogReal.from_float(0.0)
    assert zero.sign == 0 and zero.to_float() == 0.0
    two, three = LogReal.from_float(2.0), LogReal.from_float(3.0)
    np.testing.assert_allclose((two * three).to_float(), 6.0)
    np.testing.assert_allclose(two.log_add(three).to_float(), 5.0)
    assert two.log_add(zero) == two
    assert LogReal.from_float(-4.0).sign == -1
    with pytest.raises(ValueError):
        LogReal(2, 0.0)
    with pytest.raises(ValueError):
        LogReal.from_float(-1.0).log_add(two)


def test_logreal_keeps_magnitudes_past_overflow():
    big = LogReal(1, 1000.0)
    assert (big * big).log_abs == 2000.0
    assert big.log_add(big).log_abs == pytest.approx(1000.0 + math.log(2.0))


def test_scaled_sum_keeps_tiny_increments():
    acc = ScaledSum()
    acc.add(1.0)
    for _ in range(10_000):
        acc.add(1e-16)
    np.testing.assert_allclose(acc.value().to_float(), 1.0 + 1e-12, rtol=1e-15)


def test_scaled_sum_rescale_preserves_value():
    acc = ScaledSum(shift=0.0)
    acc.add(3.0)
    acc.rescale(10.0)
    np.testing.assert_allclose(acc.value().to_float(), 3.0, rtol=1e-15)


def test_scaled_series_survives_extreme_terms():
    # sum_{j<4} 1e200^j, in log space
    total = scaled_series(0.0, lambda j: 1e200, 4)
    np.testing.assert_allclose(total.log_abs, 600 * math.log(10), rtol=1e-14)


def test_poisson_closed_forms():
    np.testing.assert_allclose(poisson_tail(1), math.exp(-1), rtol=1e-15)
    np.testing.assert_allclose(poisson_upper(1), 1 - 2 * math.exp(-1), rtol=1e-14)
    np.testing.assert_allclose(poisson_tail(2), 3 * math.exp(-2), rtol=1e-14)
    np.testing.assert_allclose(poisson_mode_term(1), math.exp(-1), rtol=1e-15)


@pytest.mark.parametrize("m", [5, 50, 500, 5000])
def test_poisson_sums_against_mpmath(m):
    with mpmath.workdps(50):
        mode = mpmath.exp(-m) * mpmath.mpf(m) ** m / mpmath.factorial(m)
        head = mpmath.exp(-m) * mpmath.fsum(mpmath.mpf(m) ** nu / mpmath.factorial(nu) for nu in range(m))
        tail = float(head)
        upper = float(1 - head - mode)
        mode = float(mode)
    np.testing.assert_allclose(poisson_tail(m), tail, rtol=1e-10)
    np.testing.assert_allclose(poisson_upper(m), upper, rtol=1e-10)
    np.testing.assert_allclose(poisson_mode_term(m), mode, rtol=1e-10)


def test_poisson_domain():
    with pytest.raises(DomainError):
        poisson_tail(0)
    with pytest.raises(DomainError):
        poisson_upper(0)
