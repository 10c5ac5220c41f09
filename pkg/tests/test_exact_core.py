from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meancut import exact_core
from meancut.errors import DomainError, UndecidedError
from meancut.exact_core import (
    IntervalRational,
    ParamPair,
    e_power_interval,
    exact_p,
    exact_swap_defect,
    format_rational,
    karamata_check,
    parse_interval,
    parse_rational,
    poisson_partial_sum,
)

small_params = st.integers(min_value=1, max_value=60)


@pytest.mark.parametrize("k, l, expected", [
    (1, 1, Fraction(1, 4)),
    (2, 2, Fraction(5, 16)),
    (3, 5, Fraction(6203125, 16777216)),
])
def test_exact_p_known_values(k, l, expected):  # noqa: E741
    assert exact_p(ParamPair(k, l)) == expected


def test_exact_p_accepts_plain_tuple():
    assert exact_p((2, 2)) == Fraction(5, 16)


def test_exact_p_is_in_lowest_terms():
    value = exact_p(ParamPair(3, 5))
    assert value.denominator == 8 ** 8
    assert value.numerator % 2 == 1


@pytest.mark.parametrize("k, l", [(0, 1), (1, 0), (-3, 2)])
def test_param_pair_rejects_nonpositive(k, l):  # noqa: E741
    with pytest.raises(DomainError, match="must be >= 1"):
        ParamPair(k, l)


def test_param_pair_message_names_the_parameter():
    with pytest.raises(DomainError, match="k must be >= 1"):
        exact_p((0, 1))


@pytest.mark.parametrize("bad", [True, 1.5, "2"])
def test_param_pair_rejects_non_integers(bad):
    with pytest.raises(DomainError):
        ParamPair(bad, 1)


def test_param_pair_swapped_and_n():
    p = ParamPair(3, 5)
    assert p.n == 8
    assert p.swapped() == ParamPair(5, 3)


@pytest.mark.parametrize("k, l, expected", [
    (1, 1, Fraction(1, 2)),
    (2, 2, Fraction(3, 8)),
    (1, 2, Fraction(4, 9)),
])
def test_swap_defect_known_values(k, l, expected):  # noqa: E741
    assert exact_swap_defect(ParamPair(k, l)) == expected


@given(small_params, small_params)
@settings(max_examples=60, deadline=None)
def test_swap_identity_is_exact(k, l):  # noqa: E741
    p = ParamPair(k, l)
    assert exact_p(p) + exact_p(p.swapped()) + exact_swap_defect(p) == 1


@given(small_params, small_params)
@settings(max_examples=60, deadline=None)
def test_quarter_and_half_bounds(k, l):  # noqa: E741
    value = exact_p(ParamPair(k, l))
    assert Fraction(1, 4) <= value <= Fraction(1, 2)


@given(st.integers(min_value=1, max_value=80))
@settings(max_examples=30, deadline=None)
def test_diagonal_is_half_minus_central_binomial(n):
    from math import comb
    assert exact_p(ParamPair(n, n)) == Fraction(1, 2) - Fraction(comb(2 * n, n), 2 ** (2 * n + 1))


def test_only_minimum_is_at_one_one():
    assert exact_p(ParamPair(1, 1)) == Fraction(1, 4)
    assert exact_p(ParamPair(1, 2)) > Fraction(1, 4)
    assert exact_p(ParamPair(2, 1)) > Fraction(1, 4)


@pytest.mark.parametrize("m, n, expected", [(1, 0, 1), (2, 2, 5), (3, 3, 13)])
def test_poisson_partial_sum(m, n, expected):
    assert poisson_partial_sum(m, n) == expected


def test_poisson_partial_sum_domain():
    with pytest.raises(DomainError):
        poisson_partial_sum(0, 3)
    with pytest.raises(DomainError):
        poisson_partial_sum(2, -1)


def _strictly_inside(interval: IntervalRational, value) -> bool:
    lo = mpmath.mpf(interval.lo.numerator) / interval.lo.denominator
    hi = mpmath.mpf(interval.hi.numerator) / interval.hi.denominator
    return lo < value < hi


@pytest.mark.parametrize("l, eps", [(1, Fraction(1, 10 ** 9)), (2, Fraction(1, 10 ** 6)), (7, Fraction(1, 10 ** 12))])
def test_e_power_interval_encloses(l, eps):  # noqa: E741
    with mpmath.workdps(60):
        box = e_power_interval(l, eps)
        assert box.width <= eps
        assert _strictly_inside(box, mpmath.exp(l))


def test_e_power_interval_coarse():
    box = e_power_interval(1, 1)
    assert box.lo >= 2
    assert box.hi <= Fraction(7, 2)


def test_e_power_interval_rejects_nonpositive_eps():
    with pytest.raises(DomainError):
        e_power_interval(1, 0)


def test_interval_rejects_reversed_bounds():
    with pytest.raises(DomainError):
        IntervalRational(Fraction(2), Fraction(1))


def test_rational_text_forms():
    assert format_rational(Fraction(6203125, 16777216)) == "6203125/16777216"
    assert format_rational(Fraction(3)) == "3/1"
    assert parse_rational("5/16") == Fraction(5, 16)
    assert parse_interval("2/1,3/1").contains(Fraction(5, 2))
    with pytest.raises(DomainError):
        parse_rational("1/0")


@pytest.mark.parametrize("l", [1, 2, 3, 10])
def test_karamata_small(l):  # noqa: E741
    assert karamata_check(l) == (True, True)


def test_karamata_undecided_at_depth_limit(monkeypatch):
    # an enclosure that never tightens can never decide the comparison
    monkeypatch.setattr(exact_core, "e_power_interval", lambda l, eps: IntervalRational(Fraction(0), Fraction(10 ** 6)))
    with pytest.raises(UndecidedError, match="undecided at precision limit"):
        karamata_check(3, max_depth=4)


@pytest.mark.slow
def test_karamata_up_to_300():
    for l in range(1, 301):  # noqa: E741
        assert karamata_check(l) == (True, True), l
