"""Integral identities for R checked against adaptive quadrature.

Every closed form below rewrites int e^-t R(a, b, q, lambda t) dt over [0, x]
or [x, inf) as a series in incomplete gamma, Kummer or Laguerre functions.
Several of those series have no 1/n! and converge only when the products
prod_{j<n}(a + b q^j) eventually shrink; a guard reports when that fails.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

from ._numerics import Accumulator, exp_tail_bound
from .core import DEFAULT_CONTROL, ScalarParams, _params, eval_r
from .qcomb import DomainError, qbinom_expand
from .reports import IdentityReport, compare
from .special import (LAGUERRE_CAP, LAGUERRE_SMOOTHING, gamma_lower, gamma_lower_scaled,
                      gamma_upper, gamma_upper_scaled, kummer_m, laguerre_gamma_sum,
                      log_kummer_u_int)

__all__ = [
    "IdentityReport", "ConvergenceGuard", "ClosedForm", "RegimeError", "quad_exp_r",
    "rhs_integral_0_to_x", "rhs_integral_x_to_inf", "rhs_kummer_form", "rhs_u_form",
    "rhs_laguerre_form", "rhs_scaled", "rhs_scaled_multiplication", "verify_integral_identities",
]

MAX_OUTER = 5000
GROWTH_LIMIT = 10
J_MAX = 50


class RegimeError(DomainError):
    """The integrand or series lies outside the region where it converges."""


@dataclass(frozen=True)
class ConvergenceGuard:
    """``regime_ok`` False means the series was not summed (value is nan)."""

    regime_ok: bool
    reason: str = ""
    terms: int = 0
    last_term: float = 0.0


@dataclass(frozen=True)
class ClosedForm:
    value: float
    guard: ConvergenceGuard
    alternate: float | None = None
    note: str = ""
    converged: bool = True

    def __iter__(self):
        yield self.value
        yield self.guard


# -- decay of the coefficient products -------------------------------------------

def product_decay(params, j_max: int = J_MAX) -> tuple[float, float] | None:
    """(rho, C) with |prod_{j<n}(a + b q^j)| <= C rho^n for all n, smallest rho found.

    rho = |a| + |b| q^J over J <= j_max, C = prod_{j<J}(|a| + |b| q^j) / rho^J.
    J whose C would overflow are skipped. Returns None when no J gives rho < 1.
    """
    p = _params(params)
    best = None
    log_prod = 0.0
    for J in range(j_max + 1):
        rho = abs(p.a) + abs(p.b) * p.q**J
        if rho == 0.0:
            return 0.0, 1.0
        log_c = log_prod - J * math.log(rho)
        if rho < 1.0 and log_c < 700.0:
            c = math.exp(log_c)
            if best is None or rho < best[0] - 1e-15:
                best = (rho, c)
        log_prod += math.log(abs(p.a) + abs(p.b) * p.q**J)
    return best


def _truncation_point(params, lam: float, lo: float, tol: float) -> float:
    # |R(lambda t)| <= C e^(rho lambda t), so the tail beyond T is below
    # C e^-(1 - rho lambda) T / (1 - rho lambda); pick the J giving the smallest T
    p = _params(params)
    best = math.inf
    log_prod = 0.0
    for J in range(J_MAX + 1):
        rho = abs(p.a) + abs(p.b) * p.q**J
        d = 1.0 - rho * lam
        if d > 0:
            log_c = log_prod - J * math.log(rho) if rho > 0 else 0.0
            T = (log_c + math.log(10.0 / (tol * d))) / d
            best = min(best, T)
        if rho > 0:
            log_prod += math.log(abs(p.a) + abs(p.b) * p.q**J)
    if not math.isfinite(best):
        raise RegimeError("e^-t R(lambda t) does not decay: need (|a| + |b| q^J) lambda < 1 for some J <= 50")
    return max(best, lo + 1.0)


class _Integrand:
    """e^-t R(lambda t) from cached Taylor coefficients of R.

    Coefficients are stored as c_n S^n with S = lambda t_max and evaluated at
    u = lambda t / S in [0, 1]; the bare c_n underflow long before c_n t^n does.
    """

    def __init__(self, p: ScalarParams, lam: float, t_max: float):
        span = abs(lam) * t_max
        z = (abs(p.a) + abs(p.b)) * span
        if z > 700.0:
            raise RegimeError("integration range too long for the coefficient cache")
        coef = [1.0]
        c = 1.0
        qj = 1.0
        n = 0
        while n < 20000:
            n += 1
            c *= (p.a + p.b * qj) * span / n
            qj *= p.q
            coef.append(c)
            if c == 0.0 or (n > z and exp_tail_bound(z, n) <= 1e-17):
                break
        self.rev = coef[::-1]
        self.scale = lam / span if span > 0 else 0.0

    def __call__(self, t: float) -> float:
        u = self.scale * t
        acc = 0.0
        for c in self.rev:
            acc = acc * u + c
        return math.exp(-t) * acc


def _simpson(f, a, b, tol, depth):
    # adaptive Simpson with Richardson correction, explicit stack
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = Accumulator()
    stack = [(a, b, fa, fm, fb, whole, tol, depth)]
    while stack:
        a, b, fa, fm, fb, whole, eps, d = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if d <= 0 or abs(delta) <= 15.0 * eps:
            total.add(left + right + delta / 15.0)
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * eps, d - 1))
            stack.append((m, b, fm, frm, fb, right, 0.5 * eps, d - 1))
    return total.value


@functools.lru_cache(maxsize=4096)
def _quad_cached(p: ScalarParams, lo: float, hi: float, lam: float, tol: float) -> float:
    if math.isinf(hi):
        hi = _truncation_point(p, lam, lo, tol)
    f = _Integrand(p, lam, hi)
    # unit panels keep the error split even across long truncated ranges
    panels = max(1, int(math.ceil(hi - lo)))
    edges = [lo + (hi - lo) * i / panels for i in range(panels + 1)]
    acc = Accumulator()
    for left, right in zip(edges, edges[1:]):
        acc.add(_simpson(f, left, right, tol / panels, 40))
    return acc.value


def quad_exp_r(params, lo: float, hi: float, lambda_s: float = 1.0, tol: float = 1e-12) -> float:
    """Adaptive Simpson value of int_lo^hi e^-t R(a, b, q, lambda t) dt.

    ``hi = inf`` is truncated where the bound |R(s)| <= C e^(rho s) makes the
    remainder smaller than tol/10; the bound needs rho lambda < 1.
    """
    p = _params(params)
    lo = float(lo)
    hi = float(hi)
    if not (0.0 <= lo < hi):
        raise DomainError("need 0 <= lo < hi")
    return _quad_cached(p, lo, hi, float(lambda_s), float(tol))


# -- series helpers -------------------------------------------------------------

def _regime(p: ScalarParams, lam: float = 1.0) -> tuple[float, float] | None:
    if lam == 1.0:
        return product_decay(p)
    scaled = product_decay(p)
    if scaled is None:
        return None
    # check the scaled products prod (lambda a + lambda b q^j)
    best = product_decay(ScalarParams(p.a * lam, p.b * lam, p.q))
    return best


def _not_summed(reason: str) -> ClosedForm:
    return ClosedForm(math.nan, ConvergenceGuard(False, reason), converged=False)


def _product_series(p: ScalarParams, weight, tol: float, lam: float = 1.0, weight_bound: float = 1.0):
    """Sum_{n>=1} P_n lam^n weight(n) with P_n from the q-binomial expansion.

    Requires |weight(n)| <= weight_bound. Stops when the geometric tail bound
    C rho^(n+1) / (1 - rho) * weight_bound drops below tol * max(1, |sum|).
    Returns (sum, guard).
    """
    decay = _regime(p, lam)
    if decay is None:
        return math.nan, ConvergenceGuard(
            False, "products do not shrink: |a| + |b| q^J >= 1 for every J <= 50")
    rho, c = decay
    acc = Accumulator()
    growth = 0
    last = math.inf
    scale = 1.0
    for n in range(1, MAX_OUTER):
        scale *= lam
        pn = qbinom_expand(p.a, p.b, p.q, n) * scale
        term = pn * weight(n)
        acc.add(term)
        a_t = abs(term)
        growth = growth + 1 if a_t > last else 0
        last = a_t
        if growth >= GROWTH_LIMIT:
            return math.nan, ConvergenceGuard(False, f"terms grew {GROWTH_LIMIT} times in a row", n, a_t)
        bound = c * rho ** (n + 1) / (1.0 - rho) * weight_bound
        limit = tol * max(1.0, abs(acc.value))
        if bound <= limit and a_t <= limit:
            return acc.value, ConvergenceGuard(True, "", n, a_t)
    return acc.value, ConvergenceGuard(True, "term cap reached", MAX_OUTER, last)


def _exp_partial_weights(x: float):
    # e_n(x) = sum_{k<=n} x^k / k!, grown incrementally as n increases
    state = {"n": 0, "term": 1.0, "sum": 1.0}

    def weight(n):
        while state["n"] < n:
            state["n"] += 1
            state["term"] *= x / state["n"]
            state["sum"] += state["term"]
        return state["sum"]
    return weight


def rhs_integral_x_to_inf(params, x: float, tol: float = 1e-14) -> ClosedForm:
    """Gamma(1, x) (1 + sum_n sum_k sum_r q^(r(r-1)/2) [n r]_q a^(n-r) b^r x^k/k!), k <= n."""
    p = _params(params)
    if x < 0:
        raise DomainError("x must be nonnegative")
    s, guard = _product_series(p, _exp_partial_weights(x), tol, weight_bound=math.exp(x))
    if not guard.regime_ok:
        return ClosedForm(math.nan, guard, converged=False)
    return ClosedForm(gamma_upper(1.0, x) * (1.0 + s), guard)


def rhs_integral_0_to_x(params, x: float, tol: float = 1e-14) -> ClosedForm:
    """1 + sum_n P_n - Gamma(1, x) (1 + sum_n P_n e_n(x)), P_n in q-binomial form."""
    p = _params(params)
    if x < 0:
        raise DomainError("x must be nonnegative")
    s1, g1 = _product_series(p, lambda n: 1.0, tol)
    if not g1.regime_ok:
        return ClosedForm(math.nan, g1, converged=False)
    s2, g2 = _product_series(p, _exp_partial_weights(x), tol, weight_bound=math.exp(x))
    guard = ConvergenceGuard(True, g1.reason or g2.reason, max(g1.terms, g2.terms),
                             max(g1.last_term, g2.last_term))
    return ClosedForm(1.0 + s1 - gamma_upper(1.0, x) * (1.0 + s2), guard)


def _prod_exp_series(p: ScalarParams, x: float, inner, tol: float):
    """sum_{n>=1} P_n x^n/n! inner(n) with |inner(n)| <= e^|x|."""
    z = (abs(p.a) + abs(p.b)) * abs(x)
    acc = Accumulator()
    c = 1.0
    qj = 1.0
    for n in range(1, MAX_OUTER):
        c *= (p.a + p.b * qj) * x / n
        qj *= p.q
        term = c * inner(n)
        acc.add(term)
        limit = tol * max(1.0, abs(acc.value))
        if abs(term) <= limit and exp_tail_bound(z, n) * math.exp(abs(x)) <= limit:
            return acc.value, ConvergenceGuard(True, "", n, abs(term))
    return acc.value, ConvergenceGuard(True, "term cap reached", MAX_OUTER, abs(term))


def rhs_kummer_form(params, x: float, tol: float = 1e-14) -> ClosedForm:
    """Both confluent hypergeometric forms of int_0^x e^-t R dt.

    value:     1 + Gamma(1,x) (sum_n P_n x^n/n! 1F1(1; n+1; x) - R(x))
    alternate: 1 - Gamma(1,x) R(x) + sum_n P_n x^n/n! 1F1(n; n+1; -x)
    """
    p = _params(params)
    if x < 0:
        raise DomainError("x must be nonnegative")
    r = eval_r(p, x, DEFAULT_CONTROL).value
    g1 = gamma_upper(1.0, x)
    s1, guard1 = _prod_exp_series(p, x, lambda n: kummer_m(1.0, n + 1.0, x), tol)
    s2, guard2 = _prod_exp_series(p, x, lambda n: kummer_m(float(n), n + 1.0, -x), tol)
    first = 1.0 + g1 * (s1 - r)
    second = 1.0 - g1 * r + s2
    guard = ConvergenceGuard(True, guard1.reason or guard2.reason, max(guard1.terms, guard2.terms),
                             max(guard1.last_term, guard2.last_term))
    return ClosedForm(first, guard, second, f"forms differ by {abs(first - second):.3e}")


def rhs_u_form(params, x: float, tol: float = 1e-14) -> ClosedForm:
    """Gamma(1,x) + x e^-x sum_n P_n x^(n-1)/(n-1)! U(1; 1+n; x) + e^-x (R(x) - 1)."""
    p = _params(params)
    if not x > 0:
        raise DomainError("x must be positive")

    def weight(n):
        # x e^-x x^(n-1)/(n-1)! U(1;1+n;x) = Gamma(n,x)/(n-1)! <= 1
        return math.exp(n * math.log(x) - x - math.lgamma(n) + log_kummer_u_int(n, x))

    s, guard = _product_series(p, weight, tol)
    if not guard.regime_ok:
        return ClosedForm(math.nan, guard, converged=False)
    r = eval_r(p, x, DEFAULT_CONTROL).value
    ex = math.exp(-x)
    # U(1-n; 1-n; x) = x^n U(1; 1+n; x), so the U(1-n; 1-n; x) form is the same sum
    return ClosedForm(gamma_upper(1.0, x) + s + ex * (r - 1.0), guard)


@functools.lru_cache(maxsize=8192)
def _laguerre_inner(n: int, x: float, m_cap: int, smoothing: int):
    return laguerre_gamma_sum(n, x, m_cap=m_cap, smoothing=smoothing)


def rhs_laguerre_form(params, x: float, tol: float = 1e-14, m_cap: int = LAGUERRE_CAP,
                      smoothing: int | None = LAGUERRE_SMOOTHING) -> ClosedForm:
    """Gamma(1,x) + x e^-x sum_n P_n x^(n-1)/(n-1)! sum_m L_m^(n)(x)/(m+1) + e^-x (R(x) - 1).

    The inner Laguerre sums go through :func:`laguerre_gamma_sum`; any inner
    sum that misses its stopping test marks the result nonconvergent.
    """
    p = _params(params)
    if not x > 0:
        raise DomainError("x must be positive")
    failed = []

    def weight(n):
        inner = _laguerre_inner(n, x, m_cap, smoothing)
        if not inner.converged:
            failed.append(n)
        return math.exp(n * math.log(x) - x - math.lgamma(n)) * inner.value

    s, guard = _product_series(p, weight, tol)
    if not guard.regime_ok:
        return ClosedForm(math.nan, guard, converged=False)
    r = eval_r(p, x, DEFAULT_CONTROL).value
    value = gamma_upper(1.0, x) + s + math.exp(-x) * (r - 1.0)
    if failed:
        return ClosedForm(value, guard, note=f"Laguerre sum nonconvergent for n={failed}",
                          converged=False)
    return ClosedForm(value, guard)


def rhs_scaled(params, lambda_s: float, x: float, tol: float = 1e-14,
               variant: str = "lower") -> ClosedForm:
    """int e^-t R(lambda t) dt over [0, x] ("lower") or [x, inf) ("upper").

    lower: gamma(1,x) + sum_n P_n lambda^n/n! gamma(n+1, x)
    upper: Gamma(1,x) + sum_n P_n lambda^n/n! Gamma(n+1, x)
    The note carries the value of :func:`rhs_scaled_multiplication` for comparison.
    """
    p = _params(params)
    lam = float(lambda_s)
    if not (0.0 < lam < 2.0):
        raise DomainError("lambda must lie in (0, 2)")
    if not x > 0:
        raise DomainError("x must be positive")
    if variant == "lower":
        z = (abs(p.a) + abs(p.b)) * lam * x
        acc = Accumulator()
        c = 1.0
        qj = 1.0
        guard = ConvergenceGuard(True, "term cap reached", MAX_OUTER)
        for n in range(1, MAX_OUTER):
            c *= (p.a + p.b * qj) * lam / n
            qj *= p.q
            # gamma(n+1, x)/n! <= x^(n+1)/(n+1)!, so the terms carry their own factorial
            term = c * gamma_lower(n + 1.0, x)
            acc.add(term)
            limit = tol * max(1.0, abs(acc.value))
            if abs(term) <= limit and exp_tail_bound(z, n) * x <= limit:
                guard = ConvergenceGuard(True, "", n, abs(term))
                break
        value = gamma_lower(1.0, x) + acc.value
    elif variant == "upper":
        def weight(n):
            return math.exp(math.log(gamma_upper(n + 1.0, x)) - math.lgamma(n + 1.0))
        s, guard = _product_series(p, weight, tol, lam=lam, weight_bound=max(1.0, (1.0 + x) * 2.0))
        if not guard.regime_ok:
            return ClosedForm(math.nan, guard, converged=False)
        value = gamma_upper(1.0, x) + s
    else:
        raise DomainError("variant must be 'lower' or 'upper'")
    try:
        expanded = rhs_scaled_multiplication(p, lam, x, tol, variant).value
    except (OverflowError, ArithmeticError):
        expanded = math.nan
    return ClosedForm(value, guard, note=f"expansion with gamma(n+1, lambda x): {expanded!r}")


def rhs_scaled_multiplication(params, lambda_s: float, x: float, tol: float = 1e-14,
                       variant: str = "lower") -> ClosedForm:
    """gamma(1,x) + lambda sum_n P_n lambda^n/n! sum_m gamma(n+m+1, x) (1-lambda)^m/m!.

    The inner sum is the multiplication expansion of lambda^-(n+1) gamma(n+1, lambda x),
    carried to convergence, so this equals gamma(1,x) + sum_n P_n/n! gamma(n+1, lambda x).
    That matches int_0^x e^-t R(lambda t) dt only at lambda = 1.
    """
    p = _params(params)
    lam = float(lambda_s)
    if not (0.0 < lam < 2.0):
        raise DomainError("lambda must lie in (0, 2)")
    lower = variant == "lower"
    inner = gamma_lower_scaled if lower else gamma_upper_scaled
    base = gamma_lower(1.0, x) if lower else gamma_upper(1.0, x)
    decay = None
    if not lower:
        decay = product_decay(p)
        if decay is None:
            return _not_summed("products do not shrink")
    z = (abs(p.a) + abs(p.b)) * max(1.0, x)
    acc = Accumulator()
    c = 1.0
    qj = 1.0
    guard = ConvergenceGuard(True, "term cap reached", MAX_OUTER)
    for n in range(1, MAX_OUTER):
        c *= (p.a + p.b * qj) / n
        qj *= p.q
        term = c * inner(n + 1.0, lam, x)
        if not math.isfinite(term):
            return ClosedForm(math.nan, ConvergenceGuard(True, "expansion overflowed", n, math.inf),
                              converged=False)
        acc.add(term)
        limit = tol * max(1.0, abs(acc.value))
        if lower:
            tail = exp_tail_bound(z, n)
        else:
            # Gamma(n+1, lambda x)/n! <= 1
            tail = decay[1] * decay[0] ** (n + 1) / (1.0 - decay[0])
        if abs(term) <= limit and tail <= limit:
            guard = ConvergenceGuard(True, "", n, abs(term))
            break
    return ClosedForm(base + acc.value, guard)


# -- verification driver -----------------------------------------------------------

def verify_integral_identities(params, x: float, lambdas=(0.5, 1.0, 1.5), atol: float = 1e-8,
                               kummer_tol: float = 1e-9) -> list[IdentityReport]:
    """Compare every closed form with quadrature at one parameter point."""
    p = _params(params)
    tag = f"a={p.a!r}, b={p.b!r}, q={p.q!r}, x={x!r}"
    out = []

    def add(name, form: ClosedForm, ref: float, tol: float = atol):
        if not form.guard.regime_ok:
            out.append(IdentityReport(name, form.value, ref, math.inf, math.inf, False,
                                      f"{tag}; out of regime: {form.guard.reason}"))
            return
        rep = compare(name, form.value, ref, atol, rtol=0.0, note=tag)
        if not form.converged:
            rep = IdentityReport(rep.name, rep.lhs, rep.rhs, rep.abs_err, rep.rel_err, False,
                                 f"{tag}; {form.note}")
        out.append(rep)

    q0x = quad_exp_r(p, 0.0, x)
    qxinf = quad_exp_r(p, x, math.inf)
    add("integral [0,x]: incomplete gamma form", rhs_integral_0_to_x(p, x), q0x)
    add("integral [x,inf): incomplete gamma form", rhs_integral_x_to_inf(p, x), qxinf)
    k = rhs_kummer_form(p, x)
    add("integral [0,x]: 1F1(1; n+1; x) form", k, q0x)
    add("integral [0,x]: 1F1(n; n+1; -x) form", ClosedForm(k.alternate, k.guard), q0x)
    out.append(compare("integral [0,x]: Kummer forms agree", k.value, k.alternate, kummer_tol,
                       rtol=0.0, note=tag))
    add("integral [x,inf): U(1; 1+n; x) form", rhs_u_form(p, x), qxinf)
    add("integral [x,inf): Laguerre form", rhs_laguerre_form(p, x), qxinf)
    for lam in lambdas:
        add(f"integral [0,x], lambda={lam}: scaled form", rhs_scaled(p, lam, x, variant="lower"),
            quad_exp_r(p, 0.0, x, lam))
        add(f"integral [x,inf), lambda={lam}: scaled form", rhs_scaled(p, lam, x, variant="upper"),
            quad_exp_r(p, x, math.inf, lam))
    total = quad_exp_r(p, 0.0, math.inf)
    out.append(compare("integral: [0,x] + [x,inf) = [0,inf)",
                       rhs_integral_0_to_x(p, x).value + rhs_integral_x_to_inf(p, x).value,
                       total, atol, rtol=0.0, note=tag))
    return out
