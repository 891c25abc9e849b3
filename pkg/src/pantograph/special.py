"""Classical special functions used by the integral identities.

Incomplete gamma and beta functions, Kummer's M and U, generalized Laguerre
polynomials, and a numerical check of the standard incomplete-gamma identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._numerics import Accumulator
from .qcomb import DomainError
from .reports import IdentityReport, compare, worst

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


# -- incomplete gamma -------------------------------------------------------

def _lower_series(n: float, x: float) -> float:
    """sum_k x^k / (n (n+1) ... (n+k)); gamma(n,x) = x^n e^-x times this."""
    term = 1.0 / n
    total = term
    k = 0
    while k < _MAX_ITER:
        k += 1
        term *= x / (n + k)
        total += term
        if abs(term) < abs(total) * _EPS:
            return total
    raise ArithmeticError(f"lower incomplete gamma series did not converge (n={n}, x={x})")


def _upper_cf(n: float, x: float) -> float:
    """Modified Lentz evaluation of the continued fraction for e^x x^-n Gamma(n,x)."""
    b = x + 1.0 - n
    c = 1.0 / _TINY
    d = 1.0 / b if b != 0.0 else 1.0 / _TINY
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - n)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"upper incomplete gamma fraction did not converge (n={n}, x={x})")


def _check_x(x: float) -> float:
    x = float(x)
    if not x >= 0.0:
        raise DomainError("x must be nonnegative")
    return x


def gamma_lower(n: float, x: float) -> float:
    """Lower incomplete gamma function gamma(n, x) = int_0^x t^(n-1) e^-t dt."""
    x = _check_x(x)
    if not n > 0:
        raise DomainError("gamma_lower requires n > 0")
    if x == 0.0:
        return 0.0
    if x < n + 1.0:
        return _exp_or_inf(n * math.log(x) - x + math.log(_lower_series(n, x)))
    if n > 150.0:
        return _exp_or_inf(math.lgamma(n) + math.log1p(-math.exp(log_gamma_upper(n, x) - math.lgamma(n))))
    return math.gamma(n) - math.exp(n * math.log(x) - x) * _upper_cf(n, x)


def gamma_upper(n: float, x: float) -> float:
    """Upper incomplete gamma function Gamma(n, x) = int_x^inf t^(n-1) e^-t dt.

    Series for x < n + 1, continued fraction otherwise. Orders n <= 0 are
    reached by the downward recurrence Gamma(n, x) = (Gamma(n+1, x) - x^n e^-x) / n.
    """
    x = _check_x(x)
    if x == 0.0:
        if n <= 0:
            raise DomainError("Gamma(n, 0) diverges for n <= 0")
        return math.gamma(n)
    if n <= 0:
        if x >= 1.0:
            return math.exp(n * math.log(x) - x) * _upper_cf(n, x)
        if n == int(n):
            return _upper_nonpositive_int(int(n), x)
        return (gamma_upper(n + 1.0, x) - math.exp(n * math.log(x) - x)) / n
    if n > 150.0:
        return _exp_or_inf(log_gamma_upper(n, x))
    if x < n + 1.0:
        return math.gamma(n) - math.exp(n * math.log(x) - x) * _lower_series(n, x)
    return math.exp(n * math.log(x) - x) * _upper_cf(n, x)


def _exp_or_inf(v: float) -> float:
    return math.exp(v) if v < 709.0 else math.inf


def _upper_nonpositive_int(n: int, x: float) -> float:
    # E1(x) = -euler_gamma - ln x - sum_k (-x)^k / (k k!)
    acc = Accumulator()
    term = 1.0
    k = 0
    while True:
        k += 1
        term *= -x / k
        acc.add(term / k)
        if abs(term) < _EPS * 1e-2:
            break
    value = -0.5772156649015329 - math.log(x) - acc.value
    for m in range(0, n, -1):
        # Gamma(m-1, x) = (Gamma(m, x) - x^(m-1) e^-x) / (m - 1)
        value = (value - math.exp((m - 1) * math.log(x) - x)) / (m - 1)
    return value


def log_gamma_upper(n: float, x: float) -> float:
    """log Gamma(n, x) for n > 0, x > 0, without forming Gamma(n, x)."""
    if not (n > 0 and x > 0):
        raise DomainError("log_gamma_upper requires n > 0 and x > 0")
    if x >= n + 1.0:
        return n * math.log(x) - x + math.log(_upper_cf(n, x))
    p = math.exp(n * math.log(x) - x - math.lgamma(n)) * _lower_series(n, x)
    return math.lgamma(n) + math.log1p(-p)


def gamma_lower_scaled(n: float, lambda_s: float, x: float) -> float:
    """gamma(n, lambda x) through the multiplication expansion.

    gamma(n, lambda x) = lambda^n sum_m gamma(n+m, x) (1-lambda)^m / m!,
    carried until a geometric bound on the remaining terms is negligible.
    """
    return _scaled(gamma_lower, n, lambda_s, x, upper=False)


def gamma_upper_scaled(n: float, lambda_s: float, x: float) -> float:
    """Gamma(n, lambda x) through the same expansion with upper gammas.

    For lambda > 1 the terms alternate and can cancel badly. Since
    sum_m Gamma(n+m) (1-lambda)^m / m! = Gamma(n) lambda^-n, the series also
    equals Gamma(n) minus the lower expansion; both are summed and the one
    with the smaller rounding bound is returned.
    """
    direct, size = _scaled(gamma_upper, n, lambda_s, x, upper=True, with_size=True)
    if lambda_s <= 1.0 or not math.isfinite(n) or n > 170.0:
        return direct
    lower, lower_size = _scaled(gamma_lower, n, lambda_s, x, upper=False, with_size=True)
    g = math.gamma(n)
    if g + lower_size < size or not math.isfinite(direct):
        return g - lower
    return direct


def _scaled(fn, n, lam, x, upper, with_size=False):
    """lambda^n sum_m fn(n+m, x) (1-lambda)^m / m!; optionally also lambda^n sum |terms|."""
    if not (0.0 < lam < 2.0):
        raise DomainError("scale factor must lie in (0, 2)")
    if not n > 0:
        raise DomainError("order must be positive")
    x = _check_x(x)
    w = 1.0 - lam
    if w == 0.0 or x == 0.0:
        v = fn(n, x)
        return (v, abs(v)) if with_size else v
    acc = Accumulator()
    coef = 1.0
    log_coef = 0.0
    m = 0
    while m < _MAX_ITER:
        s = n + m
        if upper:
            # Gamma(s, x) overflows long before (1-lambda)^m/m! underflows
            mag = log_coef + log_gamma_upper(s, x)
            term = math.copysign(math.exp(mag), coef) if mag < 709.0 else math.copysign(math.inf, coef)
        else:
            term = coef * fn(s, x)
        if not math.isfinite(term):
            return (math.nan, math.inf) if with_size else math.nan
        acc.add(term)
        # Gamma(s+1,x) <= (s+x) Gamma(s,x); gamma(s+1,x) <= s gamma(s,x)
        growth = (s + x) if upper else s
        ratio = max(abs(w) * growth / (m + 1), abs(w))
        if ratio < 1.0 and abs(term) * ratio / (1.0 - ratio) <= 1e-16 * abs(acc.value):
            break
        if term == 0.0 and m > 0:
            break
        m += 1
        coef *= w / m
        log_coef += math.log(abs(w) / m)
    scale = lam**n
    if with_size:
        return scale * acc.value, scale * acc.abs_total
    return scale * acc.value


# -- beta family -------------------------------------------------------------

def _check_beta_params(p: float, q_beta: float) -> None:
    if not (p > 0 and q_beta > 0):
        raise DomainError("beta parameters must be positive")


def log_beta(p: float, q_beta: float) -> float:
    return math.lgamma(p) + math.lgamma(q_beta) - math.lgamma(p + q_beta)


def beta(p: float, q_beta: float) -> float:
    """Complete beta function Gamma(p) Gamma(q) / Gamma(p + q)."""
    _check_beta_params(p, q_beta)
    return math.exp(log_beta(p, q_beta))


def _beta_cf(p: float, q: float, x: float) -> float:
    qab = p + q
    qap = p + 1.0
    qam = p - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER):
        m2 = 2 * m
        aa = m * (q - m) * x / ((qam + m2) * (p + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(p + m) * (qab + m) * x / ((p + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def beta_regularized(x: float, p: float, q_beta: float) -> float:
    """Regularized incomplete beta I_x(p, q) = B(x; p, q) / B(p, q)."""
    _check_beta_params(p, q_beta)
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise DomainError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    if q_beta == 1.0:
        return x**p
    log_front = p * math.log(x) + q_beta * math.log1p(-x) - log_beta(p, q_beta)
    if x < (p + 1.0) / (p + q_beta + 2.0):
        return math.exp(log_front) * _beta_cf(p, q_beta, x) / p
    return 1.0 - math.exp(log_front) * _beta_cf(q_beta, p, 1.0 - x) / q_beta


def beta_incomplete(x: float, p: float, q_beta: float) -> float:
    """Incomplete beta B(x; p, q) = int_0^x t^(p-1) (1-t)^(q-1) dt."""
    return beta_regularized(x, p, q_beta) * beta(p, q_beta)


# -- confluent hypergeometric ------------------------------------------------

def _is_nonpositive_int(v: float) -> bool:
    return v <= 0 and v == math.floor(v)


def _m_series(a: float, c: float, x: float) -> tuple[float, int]:
    """Direct Kummer series; returns (value, number of terms added)."""
    acc = Accumulator()
    term = 1.0
    acc.add(term)
    added = 1
    if _is_nonpositive_int(a):
        for n in range(int(-a)):
            term *= (a + n) / (c + n) * x / (n + 1)
            acc.add(term)
            added += 1
        return acc.value, added
    n = 0
    while n < _MAX_ITER:
        term *= (a + n) / (c + n) * x / (n + 1)
        acc.add(term)
        added += 1
        n += 1
        if n > abs(x) and n > abs(a) + abs(c):
            ratio = abs(x) / (n + 1) * (abs(a) + n) / abs(c + n)
            if ratio < 1.0 and abs(term) * ratio / (1.0 - ratio) <= 1e-14 * abs(acc.value) * 1e-2:
                return acc.value, added
        if term == 0.0:
            return acc.value, added
    raise ArithmeticError(f"1F1 series did not converge (a={a}, c={c}, x={x})")


def kummer_m_terms(a_k: float, c_k: float, x: float) -> tuple[float, int]:
    """Like :func:`kummer_m` but also returns the number of series terms summed."""
    if _is_nonpositive_int(c_k):
        raise DomainError("c must not be a nonpositive integer")
    if x < 0 and not _is_nonpositive_int(a_k):
        # Kummer transformation keeps the terms one-signed
        value, added = _m_series(c_k - a_k, c_k, -x)
        return math.exp(x) * value, added
    return _m_series(a_k, c_k, x)


def kummer_m(a_k: float, c_k: float, x: float) -> float:
    """Kummer's confluent hypergeometric function 1F1(a; c; x)."""
    return kummer_m_terms(a_k, c_k, x)[0]


def _rgamma(z: float) -> float:
    if _is_nonpositive_int(z):
        return 0.0
    return 1.0 / math.gamma(z)


def kummer_u(a_k: float, c_k: float, x: float) -> float:
    """Tricomi's U(a; c; x) from its 1F1 combination, for non-integer c only.

    The combination has a removable singularity at integer c; use
    :func:`kummer_u_int` for U(1; 1+n; x).
    """
    if not x > 0:
        raise DomainError("U is evaluated for x > 0 only")
    s = math.sin(math.pi * c_k)
    if abs(s) <= 1e-8:
        raise DomainError("c too close to an integer for the 1F1 combination")
    first = kummer_m(a_k, c_k, x) * _rgamma(c_k) * _rgamma(1.0 + a_k - c_k)
    second = (x ** (1.0 - c_k) * kummer_m(1.0 + a_k - c_k, 2.0 - c_k, x)
              * _rgamma(a_k) * _rgamma(2.0 - c_k))
    return math.pi / s * (first - second)


def log_kummer_u_int(n: int, x: float) -> float:
    """log U(1; 1+n; x), finite even where U itself overflows."""
    if n < 1 or int(n) != n:
        raise DomainError("n must be a positive integer")
    if not x > 0:
        raise DomainError("x must be positive")
    return x - n * math.log(x) + log_gamma_upper(n, x)


def kummer_u_int(n: int, x: float) -> float:
    """U(1; 1+n; x) = x^-n e^x Gamma(n, x) for integer n >= 1."""
    return math.exp(log_kummer_u_int(n, x))


def kummer_u_poly(n: int, x: float) -> float:
    """U(1; 1+n; x) from the binomial expansion of its integral representation.

    U(1; 1+n; x) = int_0^inf e^(-xt) (1+t)^(n-1) dt
                 = sum_{k<n} (n-1)! / (n-1-k)! x^(-k-1).
    Independent of the incomplete gamma evaluators.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    if not x > 0:
        raise DomainError("x must be positive")
    terms = []
    t = 1.0 / x
    for k in range(n):
        terms.append(t)
        t *= (n - 1 - k) / x
    return math.fsum(terms)


def laguerre(m: int, alpha_l: float, x: float) -> float:
    """Generalized Laguerre polynomial L_m^(alpha)(x) by the three-term recurrence."""
    if m < 0:
        raise DomainError("degree must be nonnegative")
    prev, cur = 1.0, 1.0 + alpha_l - x
    if m == 0:
        return prev
    for k in range(1, m):
        prev, cur = cur, ((2 * k + 1 + alpha_l - x) * cur - (k + alpha_l) * prev) / (k + 1)
    return cur


@dataclass(frozen=True)
class LaguerreSum:
    """Partial evaluation of sum_m L_m^(n)(x) / (m + 1)."""

    value: float
    converged: bool
    terms: int
    envelope: float


def laguerre_gamma_sum(n: float, x: float, m_cap: int = 200, smoothing: int | None = None,
                       tol: float = 1e-13) -> LaguerreSum:
    """sum_m L_m^(n)(x) / (m+1), which equals e^x x^-n Gamma(n, x).

    The raw series (``smoothing=None``) converges slowly or not at all once
    n >= 1/2; it aborts after 5 consecutive growing terms.

    With ``smoothing = s`` the series is summed by parts k = ceil(n) + s times.
    The relation L_m^(b) = L_m^(b+1) - L_{m-1}^(b+1) turns it into
    sum_m L_m^(n+k)(x) k! / ((m+1)(m+2)...(m+k+1)), whose terms grow until the
    Laguerre oscillation sets in near m ~ (n+k)^2 / (4x) and then decay like
    m^((n-k)/2 - 5/4). Summation stops once the largest term over one
    oscillation period, past twice the onset, is below ``tol`` times the sum.
    Reaching ``m_cap`` first leaves ``converged`` False.
    """
    if not x > 0:
        raise DomainError("x must be positive")
    if smoothing is None:
        return _laguerre_raw(n, x, m_cap)
    k = int(math.ceil(n)) + int(smoothing)
    beta_ = n + k
    onset = beta_ * beta_ / (4.0 * x)
    # u_m = L_m^(beta)(x) k!/((m+1)...(m+k+1)) obeys its own three-term recurrence,
    # so the polynomial values themselves never have to be formed
    u_prev = 1.0 / (k + 1)
    u_cur = (1.0 + beta_ - x) / ((k + 1) * (k + 2))
    acc = Accumulator()
    acc.add(u_prev)
    acc.add(u_cur)
    block = 0.0
    block_len = 0
    m = 1
    while m + 1 < m_cap:
        m += 1
        u_prev, u_cur = u_cur, ((2 * m - 1 + beta_ - x) * u_cur
                                - (m - 1 + beta_) * (m - 1) / (m + k) * u_prev) / (m + k + 1)
        acc.add(u_cur)
        a_u = abs(u_cur)
        if a_u > block:
            block = a_u
        block_len += 1
        if block_len >= 20 and block_len >= 3.2 * math.sqrt(m / x):
            if not math.isfinite(acc.value):
                return LaguerreSum(acc.value, False, m + 1, math.inf)
            if m > 2.0 * onset and block <= tol * abs(acc.value):
                return LaguerreSum(acc.value, True, m + 1, block)
            block = 0.0
            block_len = 0
    return LaguerreSum(acc.value, False, m + 1, max(block, abs(u_cur)))


def _laguerre_raw(n, x, m_cap):
    prev, cur = 0.0, 1.0
    acc = Accumulator()
    growth = 0
    last = math.inf
    for m in range(m_cap):
        if m == 1:
            prev, cur = cur, 1.0 + n - x
        elif m > 1:
            prev, cur = cur, ((2 * m - 1 + n - x) * cur - (m - 1 + n) * prev) / m
        term = cur / (m + 1)
        acc.add(term)
        a_t = abs(term)
        growth = growth + 1 if a_t > last else 0
        last = a_t
        if growth >= 5:
            return LaguerreSum(acc.value, False, m + 1, a_t)
        if m >= 10 and a_t <= 1e-16 * abs(acc.value):
            return LaguerreSum(acc.value, True, m + 1, a_t)
    return LaguerreSum(acc.value, False, m_cap, abs(last))


def gamma_upper_laguerre(n: float, x: float, m_cap: int = 200, smoothing: int | None = None,
                         tol: float = 1e-13) -> LaguerreSum:
    """Gamma(n, x) = e^-x x^n sum_m L_m^(n)(x) / (m+1); see :func:`laguerre_gamma_sum`."""
    s = laguerre_gamma_sum(n, x, m_cap=m_cap, smoothing=smoothing, tol=tol)
    scale = math.exp(n * math.log(x) - x)
    return LaguerreSum(scale * s.value, s.converged, s.terms, scale * s.envelope)


# -- identity suite ------------------------------------------------------------

IDENTITY_TOL = {1: 1e-12, 2: 1e-12, 3: 1e-12, 4: 1e-12, 5: 1e-12, 6: 1e-12,
                7: 1e-8, 8: 1e-10, 9: 1e-10, 10: 1e-10, 11: 1e-10}

# settings for the Laguerre representation of Gamma(n, x)
LAGUERRE_SMOOTHING = 32
LAGUERRE_CAP = 2_000_000


def _exp_partial(x: float, n: int) -> list[float]:
    terms = [1.0]
    for m in range(1, n + 1):
        terms.append(terms[-1] * x / m)
    return terms


def _item6_rhs(n: int, x: float) -> float:
    # n! (1 - e^-x sum_{m<=n} x^m/m!); for x < n+1 the bracket is rewritten as
    # e^-x sum_{m>n} x^m/m! so the subtraction does not cancel
    fact = math.factorial(n)
    if x >= n + 1:
        return fact * (1.0 - math.exp(-x) * math.fsum(_exp_partial(x, n)))
    term = 1.0
    for m in range(1, n + 2):
        term *= x / m
    tail = Accumulator()
    m = n + 1
    while True:
        tail.add(term)
        m += 1
        term *= x / m
        if term < 1e-17 * tail.value:
            break
    return fact * math.exp(-x) * tail.value


def verify_gamma_identities(x: float, n_max: int) -> list[IdentityReport]:
    """Check the eleven standard incomplete-gamma identities at ``x``.

    n-dependent identities are checked for n = 1..n_max and the worst case is
    reported. Failures are reported, never raised.
    """
    if not x > 0:
        raise DomainError("x must be positive")
    if not 1 <= n_max <= 30:
        raise DomainError("n_max must lie in 1..30")
    ex = math.exp(-x)
    out: list[IdentityReport] = []
    out.append(compare("gamma-1: Gamma(1,x) = e^-x", gamma_upper(1.0, x), ex, IDENTITY_TOL[1]))
    out.append(compare("gamma-2: gamma(1,x) = 1 - e^-x", gamma_lower(1.0, x), -math.expm1(-x),
                       IDENTITY_TOL[2]))

    def per_n(item, name, fn):
        reports = []
        for n in range(1, n_max + 1):
            lhs, rhs, note = fn(n)
            reports.append(compare(name, lhs, rhs, IDENTITY_TOL[item], note=f"n={n}" + note))
        return worst(reports, name)

    out.append(per_n(3, "gamma-3: Gamma(n+1,x) = n Gamma(n,x) + x^n e^-x", lambda n: (
        gamma_upper(n + 1.0, x), n * gamma_upper(n, x) + math.exp(n * math.log(x) - x), "")))
    out.append(per_n(4, "gamma-4: gamma(n+1,x) = n gamma(n,x) - x^n e^-x", lambda n: (
        gamma_lower(n + 1.0, x), n * gamma_lower(n, x) - math.exp(n * math.log(x) - x), "")))
    out.append(per_n(5, "gamma-5: Gamma(n+1,x) = n! e^-x sum x^m/m!", lambda n: (
        gamma_upper(n + 1.0, x), math.factorial(n) * ex * math.fsum(_exp_partial(x, n)), "")))
    out.append(per_n(6, "gamma-6: gamma(n+1,x) = n!(1 - e^-x sum x^m/m!)", lambda n: (
        gamma_lower(n + 1.0, x), _item6_rhs(n, x), "")))

    def item7(n):
        s = gamma_upper_laguerre(n, x, m_cap=LAGUERRE_CAP, smoothing=LAGUERRE_SMOOTHING)
        note = f"; {s.terms} Laguerre terms" + ("" if s.converged else ", nonconvergent")
        return gamma_upper(n, x), s.value, note

    out.append(per_n(7, "gamma-7: Gamma(n,x) = e^-x x^n sum L_m^(n)(x)/(m+1)", item7))
    out.append(per_n(8, "gamma-8: gamma(n,x) = x^n e^-x 1F1(1;n+1;x)/n", lambda n: (
        gamma_lower(n, x), math.exp(n * math.log(x) - x) * kummer_m(1.0, n + 1.0, x) / n, "")))
    out.append(per_n(9, "gamma-9: gamma(n,x) = x^n 1F1(n;n+1;-x)/n", lambda n: (
        gamma_lower(n, x), math.exp(n * math.log(x)) * kummer_m(float(n), n + 1.0, -x) / n, "")))
    out.append(per_n(10, "gamma-10: Gamma(n,x) = x^n e^-x U(1;1+n;x)", lambda n: (
        gamma_upper(n, x), math.exp(n * math.log(x) - x) * kummer_u_poly(n, x), "")))
    # U(1-n; 1-n; x) = x^n U(1; 1+n; x) by Kummer's transformation
    out.append(per_n(11, "gamma-11: Gamma(n,x) = e^-x U(1-n;1-n;x)", lambda n: (
        gamma_upper(n, x), ex * (math.exp(n * math.log(x)) * kummer_u_poly(n, x)), "")))
    return out
