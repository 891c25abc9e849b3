import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from pantograph.core import (EvalControl, ScalarParams, Status, beta_form_eval, bounds_check, canonical_form,
                             check_beta_forms, check_relation, coefficient_products, contiguous_relations,
                             derivative_r, derivative_shifted, djm_terms, eval_r, r_value, scaling_relations)
from pantograph.qcomb import DomainError
from pantograph.suites import fd_derivative

# 50-digit references from tests/oracles.py
FROZEN_R = [
    ((1, 1, 0.5), 1.0, 5.3456182712877400998),
    ((0, 1, 0.5), 1.0, 2.2714925555010614874),
    ((-1, 0.5, 0.5), 5.0, 0.23789944481630025971),
    ((0.3, -0.2, 0.8), 5.0, 1.7408990889679773994),
    ((-2, 0.5, 0.9), 10.0, 0.000011809534704257345881),
    ((1, 1, 0.5), 0.5, 2.4653867026841855725),
    ((-0.5, -1.5, 0.3), 4.0, 0.1753744168302298605),
    ((1.5, -2, 0.7), 3.0, -1.0086237554651049273),
]

ab = st.floats(-2.0, 2.0)
qs = st.floats(0.05, 0.95)


@pytest.mark.parametrize("params, x, ref", FROZEN_R)
def test_frozen_values(params, x, ref):
    res = eval_r(params, x)
    assert res.converged
    assert res.value == pytest.approx(ref, rel=1e-12)


def test_eval_examples():
    assert r_value((0.7, 0, 0.5), 2.0) == pytest.approx(math.exp(1.4), rel=1e-14)
    assert eval_r((0.3, -1.2, 0.4), 0.0).value == 1.0
    assert r_value((1, 1, 0.5), 1.0) == pytest.approx(5.345618, abs=1e-5)
    assert r_value((0, 1, 0.5), 1.0) == pytest.approx(2.271492, abs=1e-5)


def test_result_fields():
    res = eval_r((1, 1, 0.5), 1.0)
    assert res.status is Status.CONVERGED and res.status.value == "converged"
    assert res.terms_used > 10
    assert 0 <= res.tail_bound <= 1e-14 * res.value


def test_term_cap_and_overflow_are_flagged():
    capped = eval_r((1, 1, 0.5), 5.0, EvalControl(max_terms=5))
    assert capped.status is Status.HIT_TERM_CAP and not capped.converged
    over = eval_r((1, 1, 0.5), 1000.0)
    assert over.status is Status.OVERFLOW


@given(st.floats(-2, 2), qs, st.floats(0, 10))
def test_b_zero_is_exponential(a, q, x):
    assert r_value((a, 0.0, q), x) == pytest.approx(math.exp(a * x), rel=1e-12)


@given(st.floats(0.0, 2.0), qs, st.floats(0.0, 3.0))
def test_a_zero_scales_into_argument(b, q, x):
    assert r_value((0.0, b, q), x) == pytest.approx(r_value((0.0, 1.0, q), b * x), rel=1e-13)


@settings(max_examples=60)
@given(ab, ab, qs, st.floats(0.05, 3.0))
def test_solves_the_delay_equation(a, b, q, x):
    R = lambda t: r_value((a, b, q), t)  # noqa: E731
    lhs = fd_derivative(R, x, 1)
    rhs = a * R(x) + b * R(q * x)
    assert abs(lhs - rhs) <= 1e-7 * (1 + abs(rhs))


@given(ab, ab, qs, st.floats(0.0, 2.0))
def test_direct_and_shifted_paths_agree(a, b, q, x):
    d = eval_r((a, b, q), x, EvalControl(method="direct")).value
    s = eval_r((a, b, q), x, EvalControl(method="shifted")).value
    scale = math.exp((abs(a) + abs(b)) * x)  # size of the largest direct terms
    assert abs(d - s) <= 1e-13 * scale


def test_djm_examples():
    assert djm_terms((1, 1, 0.5), 1.0, 2) == pytest.approx([1.0, 2.0, 1.5])
    assert djm_terms((0.4, -2, 0.5), 0.0, 3) == [1.0, 0.0, 0.0, 0.0]
    assert djm_terms((0.3, 0.4, 0.5), 1.0, 1) == pytest.approx([1.0, 0.7])


@given(st.floats(0, 2), st.floats(0, 2), qs, st.floats(0, 3))
def test_djm_partial_sums_converge_to_direct_value(a, b, q, x):
    terms = djm_terms((a, b, q), x, 80)
    direct = eval_r((a, b, q), x, EvalControl(method="direct")).value
    assert math.fsum(terms) == pytest.approx(direct, rel=1e-13)


@given(ab, ab, qs, st.integers(0, 30))
def test_coefficient_products_two_ways(a, b, q, n):
    direct = coefficient_products((a, b, q), n)
    expanded = coefficient_products((a, b, q), n, expand=True)
    for k, (d, e) in enumerate(zip(direct, expanded)):
        size = math.prod(abs(a) + abs(b) * q**j for j in range(k))
        assert abs(d - e) <= 1e-12 * max(size, 1e-300)


def test_derivative_examples():
    p = ScalarParams(1, 1, 0.5)
    assert derivative_r(p, 1.0, 1).value == pytest.approx(r_value(p, 1.0) + r_value(p, 0.5), rel=1e-14)
    assert derivative_r((0.7, 0, 0.5), 2.0, 3).value == pytest.approx(0.7**3 * math.exp(1.4), rel=1e-13)
    assert derivative_r(p, 0.0, 2).value == pytest.approx(3.0, rel=1e-15)
    assert derivative_shifted((1, 0, 0.5), 1.0, 0).value == pytest.approx(math.e, rel=1e-14)


@settings(max_examples=40)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(0.1, 0.9), st.floats(0.1, 2.0), st.integers(1, 4))
def test_mth_derivative_matches_finite_differences(a, b, q, x, m):
    p = ScalarParams(a, b, q)
    fd = fd_derivative(lambda t: r_value(p, t), x, m)
    d = derivative_r(p, x, m).value
    assert abs(d - fd) <= 1e-4 * (1 + abs(fd))


@settings(max_examples=40)
@given(ab, ab, qs, st.floats(0.0, 2.0), st.integers(0, 4))
def test_shifted_derivative_matches_central_difference(a, b, q, x, m):
    p = ScalarParams(a, b, q)
    h = 1e-5
    qm = q**m
    fd = (r_value(p, qm * (x + h)) - r_value(p, qm * (x - h))) / (2 * h)
    assert abs(derivative_shifted(p, x, m).value - fd) <= 1e-6 * (1 + abs(fd))


def test_bounds_examples():
    rep = bounds_check((1, 1, 0.5), 1.0)
    assert rep.passed
    d = rep.to_dict()
    assert d["lower"] == pytest.approx(2.71828, abs=1e-5)
    assert d["upper"] == pytest.approx(7.38906, abs=1e-5)
    assert rep.lhs == pytest.approx(5.34562, abs=1e-5)
    flat = bounds_check((0, 0, 0.5), 3.0)
    assert flat.passed and flat.lhs == 1.0
    assert bounds_check((2, 0, 0.5), 1.0).passed


@given(st.floats(0, 2), st.floats(0, 2), st.floats(0.01, 0.99), st.floats(0, 5))
def test_bounds_hold(a, b, q, x):
    assert bounds_check((a, b, q), x).passed


def test_bounds_domain():
    with pytest.raises(DomainError):
        bounds_check((1, -1, 0.5), 1.0)
    with pytest.raises(DomainError):
        bounds_check((1, 1, 0.5), -1.0)


def test_canonical_form():
    base, scale = canonical_form((2.0, 3.0, 0.5))
    assert (base.a, base.b, base.q, scale) == (1.0, 1.5, 0.5, 2.0)
    assert r_value((2.0, 3.0, 0.5), 0.7) == pytest.approx(r_value(base, scale * 0.7), rel=1e-13)
    with pytest.raises(DomainError):
        canonical_form((0.0, 1.0, 0.5))


def test_beta_form_examples():
    assert beta_form_eval((1, 1, 0.5), 0.0) == 1.0
    for form in (1, 2, 3):
        assert beta_form_eval((1, 1, 0.5), 1.0, form=form) == pytest.approx(5.345618, abs=1e-6)
    assert all(r.passed for r in check_beta_forms((0.3, 0.4, 0.5), 0.5))


@given(ab, ab, qs, st.floats(0, 1))
def test_beta_forms_agree(a, b, q, x):
    assert all(r.passed for r in check_beta_forms((a, b, q), x))


@settings(max_examples=40)
@given(st.floats(0.5, 1.5), st.floats(0.5, 1.5), st.integers(1, 2), st.integers(1, 2), qs, st.floats(0, 1.5))
def test_scaling_relations(a, b, l, m, q, x):
    for rel in scaling_relations(a, b, l, m):
        assert check_relation(rel, q, x).passed, rel.name


@given(ab, ab, qs, st.floats(0, 1.5))
def test_contiguous_relations(a, b, q, x):
    assume(min(abs(a), abs(a - 1), abs(a + 1)) > 0.05)
    for rel in contiguous_relations(a, b):
        assert check_relation(rel, q, x).passed, rel.name


def test_params_validation():
    with pytest.raises(DomainError, match=r"q must lie in \(0,1\)"):
        ScalarParams(1, 1, 1.2)
    with pytest.raises(DomainError):
        ScalarParams(math.inf, 1, 0.5)
    with pytest.raises(DomainError):
        EvalControl(method="fast")
    with pytest.raises(DomainError):
        beta_form_eval((1, 1, 0.5), 1.5)
