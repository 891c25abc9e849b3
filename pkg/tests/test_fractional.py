import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pantograph.core import EvalControl, ScalarParams, Status, eval_r
from pantograph.fractional import (FractionalParams, alpha_coefficients, alpha_terms, caputo_recurrence_check,
                                   check_fractional_relation, eval_r_alpha, fractional_scaling_relations)
from pantograph.qcomb import DomainError
from pantograph.suites import STANDARD_SUITE, mittag_leffler_half

# 50-digit direct summation, tests/oracles.py
FROZEN = [
    ((1.0, 0.0, 0.5, 1.0, 0.5), 5.0089800807622834663),
    ((0.3, 0.4, 0.5, 2.0, 0.75), 3.4990600382064735385),
    ((-0.2, 0.1, 0.9, 1.5, 0.25), 0.89064937130843815768),
]


def fp(a, b, q, alpha):
    return FractionalParams(ScalarParams(a, b, q), alpha)


@pytest.mark.parametrize("args,ref", FROZEN)
def test_frozen_values(args, ref):
    a, b, q, x, alpha = args
    assert eval_r_alpha(fp(a, b, q, alpha), x).value == pytest.approx(ref, rel=1e-12)


def test_examples():
    assert eval_r_alpha(fp(1, 1, 0.5, 1.0), 1.0).value == pytest.approx(5.3456182712877400998, rel=1e-12)
    assert eval_r_alpha(fp(0.3, 0.4, 0.5, 0.5), 0.0).value == 1.0


def test_half_order_exponential_is_erfc_form():
    # a = 1, b = 0, alpha = 1/2 sums to E_{1/2}(x^(1/2)) = e^x erfc(-x^(1/2))
    for x in (0.25, 1.0, 2.25):
        z = math.sqrt(x)
        assert eval_r_alpha(fp(1, 0, 0.5, 0.5), x).value == pytest.approx(mittag_leffler_half(z), rel=1e-12)
    assert mittag_leffler_half(1.0) == pytest.approx(math.e * (1 + math.erf(1.0)), rel=1e-15)


@pytest.mark.parametrize("params", STANDARD_SUITE)
def test_unit_order_matches_integer_series(params):
    for x in np.linspace(0, 5, 21):
        ref = eval_r(params, x).value
        assert abs(eval_r_alpha(fp(*params, 1.0), x).value - ref) <= 1e-12 * abs(ref)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75, 1.0])
def test_caputo_recurrence(alpha):
    for params in [(0.3, 0.4, 0.5), (-0.2, 0.1, 0.9), (1, 1, 0.5)]:
        assert caputo_recurrence_check(fp(*params, alpha), 50).passed


def test_caputo_examples():
    assert caputo_recurrence_check(fp(1, 1, 0.5, 1.0), 30).passed
    with pytest.raises(DomainError):
        caputo_recurrence_check(fp(1, 1, 0.5, 1.0), 101)


def test_terms_add_up():
    p = fp(0.3, 0.4, 0.5, 0.75)
    assert math.fsum(alpha_terms(p, 2.0, 80)) == pytest.approx(FROZEN[1][1], rel=1e-13)
    c = alpha_coefficients(p, 3)
    assert c[1] == pytest.approx(0.7 / math.gamma(1.75), rel=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0.05, 0.95), st.floats(0.2, 1.0), st.floats(0.1, 4.0))
def test_ratio_decreases_below_one_once_converged(a, b, q, alpha, x):
    p = fp(a, b, q, alpha)
    res = eval_r_alpha(p, x)
    if not res.converged:
        # small alpha delays the decay past the default term cap; a larger cap settles it
        assert res.status is Status.HIT_TERM_CAP
        res = eval_r_alpha(p, x, EvalControl(max_terms=20000))
        assert res.converged
    # the majorant ratio z Gamma(alpha n + 1)/Gamma(alpha n + alpha + 1) is below 1 at the stop
    z = (abs(a) + abs(b)) * x**alpha
    n = res.terms_used
    assert z * math.exp(math.lgamma(alpha * n + 1) - math.lgamma(alpha * n + alpha + 1)) < 1


@settings(max_examples=10, deadline=None)
@given(st.floats(0.5, 1.5), st.floats(0.5, 1.5), st.sampled_from([1, 2]), st.sampled_from([1, 2]),
       st.floats(0.1, 0.9), st.sampled_from([0.25, 0.5, 0.75, 1.0]), st.floats(0.0, 1.5))
def test_fractional_scaling(a, b, l, m, q, alpha, x):
    for rel in fractional_scaling_relations(a, b, l, m, alpha):
        assert check_fractional_relation(rel, q, alpha, x).passed


def test_small_order_reports_term_cap():
    res = eval_r_alpha(fp(1.0, 1.5, 0.5, 0.25), 1.0)
    assert res.status is Status.HIT_TERM_CAP and res.terms_used == 500
    full = eval_r_alpha(fp(1.0, 1.5, 0.5, 0.25), 1.0, EvalControl(max_terms=20000))
    assert full.converged and abs(full.value - res.value) <= res.tail_bound


def test_domain_errors():
    with pytest.raises(DomainError):
        fp(1, 1, 0.5, 0.0)
    with pytest.raises(DomainError):
        fp(1, 1, 0.5, 1.5)
    with pytest.raises(DomainError):
        eval_r_alpha(fp(1, 1, 0.5, 0.5), -1.0)
    with pytest.raises(DomainError):
        fractional_scaling_relations(-1, 1, 1, 1, 0.5)
