import math

import pytest
from hypothesis import given, settings, strategies as st

from pantograph.qcomb import (DomainError, binom2, check_q, gauss_binom, gauss_binom_row, qbinom_expand,
                              rising_q_product)
from pantograph.suites import pascal_errors, qbinom_scaled_error

qs = st.floats(min_value=1e-6, max_value=1 - 1e-6)
coef = st.floats(min_value=-2.0, max_value=2.0)


@pytest.mark.parametrize("n, r, q, expected", [(5, 7, 0.3, 0.0), (4, 0, 0.5, 1.0), (2, 1, 0.5, 1.5)])
def test_gauss_binom_examples(n, r, q, expected):
    assert gauss_binom(n, r, q) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("a, b, q, n, expected", [(1, 0, 0.5, 7, 1.0), (0, 1, 0.5, 3, 0.125), (1, 1, 0.5, 2, 3.0)])
def test_rising_product_examples(a, b, q, n, expected):
    assert rising_q_product(a, b, q, n) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("a, b, q, n, expected", [(1, 1, 0.5, 0, 1.0), (2, 0, 0.9, 3, 8.0), (1, 1, 0.5, 2, 3.0)])
def test_qbinom_expand_examples(a, b, q, n, expected):
    assert qbinom_expand(a, b, q, n) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("q", [0.0, 1.0, -0.2, 1.2, math.nan])
def test_q_outside_unit_interval_rejected(q):
    with pytest.raises(DomainError, match=r"q must lie in \(0,1\)"):
        check_q(q)
    with pytest.raises(DomainError):
        gauss_binom(3, 1, q)


def test_lower_index_outside_range_is_exactly_zero():
    for n in range(0, 31):
        assert gauss_binom(n, -1, 0.7) == 0.0
        assert gauss_binom(n, n + 1, 0.7) == 0.0


def test_binom2():
    assert [binom2(r) for r in range(5)] == [0, 0, 1, 3, 6]


def test_q_to_one_limit_is_ordinary_binomial():
    assert gauss_binom(10, 4, 1 - 1e-9) == pytest.approx(math.comb(10, 4), rel=1e-6)


def test_large_n_stays_finite():
    # running fraction product: no overflow in intermediate numerators
    v = gauss_binom(400, 200, 0.5)
    assert math.isfinite(v) and v > 1.0


def test_overflow_propagates_as_inf():
    assert rising_q_product(1e200, 1e200, 0.5, 3) == math.inf


@given(st.integers(0, 30), qs)
def test_row_matches_single_coefficients(n, q):
    row = gauss_binom_row(n, q)
    for r, v in enumerate(row):
        assert v == pytest.approx(gauss_binom(n, r, q), rel=1e-13)


@given(st.integers(1, 30), qs)
def test_pascal_rule_in_units_of_coefficient(n, q):
    _, scaled = pascal_errors(n, q)
    assert scaled <= 1e-13


@given(st.integers(1, 30), st.floats(min_value=1e-6, max_value=0.6))
def test_pascal_rule_absolute_for_moderate_q(n, q):
    # coefficients stay O(10^3) here, so absolute rounding error stays below 1e-13
    absolute, _ = pascal_errors(n, q)
    assert absolute <= 1e-13


@given(st.integers(0, 30), st.integers(0, 30), qs)
def test_symmetry(n, r, q):
    if r <= n:
        v = gauss_binom(n, r, q)
        assert abs(v - gauss_binom(n, n - r, q)) <= 1e-13 * max(1.0, v)


@given(coef, coef, qs, st.integers(0, 30))
def test_qbinomial_theorem_scaled_error(a, b, q, n):
    _, _, err = qbinom_scaled_error(a, b, q, n)
    assert err <= 1e-12


@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0), qs, st.integers(0, 30), st.sampled_from([1.0, -1.0]))
def test_qbinomial_theorem_relative_same_sign(a, b, q, n, s):
    lhs = rising_q_product(s * a, s * b, q, n)
    rhs = qbinom_expand(s * a, s * b, q, n)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs))


@settings(max_examples=50)
@given(st.floats(1e-3, 0.999), st.integers(1, 30))
def test_row_sum_at_a_eq_b_eq_one(q, n):
    # sum_r q^(r(r-1)/2) [n,r] = prod_{j<n} (1 + q^j)
    row = gauss_binom_row(n, q)
    lhs = math.fsum(q ** binom2(r) * v for r, v in enumerate(row))
    assert lhs == pytest.approx(math.prod(1 + q**j for j in range(n)), rel=1e-13)
