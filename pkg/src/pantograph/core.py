"""Evaluation of R(a, b, q, x) = 1 + sum_n x^n/n! prod_{j<n} (a + b q^j).

R solves y'(x) = a y(x) + b y(qx), y(0) = 1. Besides the series evaluator this
module holds the derivative formulas, the exponential bounds, and the
parameter relations (scaling, contiguous and incomplete-beta forms).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._numerics import Accumulator, exp_tail_bound
from .qcomb import DomainError, binom2, check_q, gauss_binom, qbinom_expand, rising_q_product
from .reports import IdentityReport, compare
from .special import beta_incomplete, beta, beta_regularized


@dataclass(frozen=True)
class ScalarParams:
    a: float
    b: float
    q: float

    def __post_init__(self):
        check_q(self.q)
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise DomainError("a and b must be finite")


@dataclass(frozen=True)
class EvalControl:
    """Truncation settings.

    ``method`` selects the summation: "direct" sums the defining series,
    "shifted" sums R = e^(ax) s(x) where s solves s'(x) = b e^(-a(1-q)x) s(qx),
    and "auto" picks "shifted" when a x < 0 (where the direct terms alternate
    and cancel).
    """

    rel_tol: float = 1e-14
    max_terms: int = 500
    compensated: bool = True
    method: str = "auto"

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1.0):
            raise DomainError("rel_tol must lie in (0,1)")
        if self.max_terms < 2:
            raise DomainError("max_terms must be at least 2")
        if self.method not in ("auto", "direct", "shifted"):
            raise DomainError(f"unknown method {self.method!r}")


DEFAULT_CONTROL = EvalControl()


class Status(str, enum.Enum):
    CONVERGED = "converged"
    HIT_TERM_CAP = "hit_term_cap"
    OVERFLOW = "overflow"


@dataclass(frozen=True)
class SeriesResult:
    """``condition`` is sum |terms| / |value|; large values flag cancellation."""

    value: float
    terms_used: int
    tail_bound: float
    status: Status
    condition: float = 1.0

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def _params(p) -> ScalarParams:
    if isinstance(p, ScalarParams):
        return p
    return ScalarParams(*p)


def eval_r(params, x: float, control: EvalControl = DEFAULT_CONTROL) -> SeriesResult:
    """R(a, b, q, x) with an analytic bound on the truncated tail."""
    p = _params(params)
    x = float(x)
    if x == 0.0:
        return SeriesResult(1.0, 1, 0.0, Status.CONVERGED)
    method = control.method
    if method == "auto":
        method = "shifted" if p.a * x < 0 else "direct"
    if method == "shifted":
        return _eval_shifted(p, x, control)
    return _eval_direct(p, x, control)


def _eval_direct(p: ScalarParams, x: float, control: EvalControl) -> SeriesResult:
    z = (abs(p.a) + abs(p.b)) * abs(x)
    acc = Accumulator(control.compensated)
    term = 1.0
    acc.add(term)
    qj = 1.0
    small = 0
    tail = math.inf
    for n in range(1, control.max_terms):
        term *= (p.a + p.b * qj) * x / n
        qj *= p.q
        if not math.isfinite(term):
            return SeriesResult(acc.value, n, math.inf, Status.OVERFLOW)
        acc.add(term)
        total = acc.value
        if not math.isfinite(total):
            return SeriesResult(total, n + 1, math.inf, Status.OVERFLOW)
        limit = control.rel_tol * abs(total)
        small = small + 1 if abs(term) <= limit else 0
        if small >= 2:
            tail = exp_tail_bound(z, n)
            if tail <= limit:
                return SeriesResult(total, n + 1, tail, Status.CONVERGED,
                                    _condition(acc.abs_total, total))
    total = acc.value
    tail = exp_tail_bound(z, control.max_terms - 1)
    return SeriesResult(total, control.max_terms, tail, Status.HIT_TERM_CAP,
                        _condition(acc.abs_total, total))


def _condition(abs_total, total):
    return abs_total / abs(total) if total != 0 else math.inf


def _eval_shifted(p: ScalarParams, x: float, control: EvalControl) -> SeriesResult:
    # s(x) = e^(-ax) R(x); with tau_n = sigma_n x^n the coefficients obey
    # tau_{n+1} = b x/(n+1) sum_k g_{n-k} q^k tau_k,  g_j = (c x)^j / j!,  c = -a(1-q)
    N = control.max_terms
    cx = -p.a * (1.0 - p.q) * x
    g = np.empty(N)
    g[0] = 1.0
    for j in range(1, N):
        g[j] = g[j - 1] * cx / j
    qk = p.q ** np.arange(N)
    tau = np.zeros(N)
    tau[0] = 1.0
    wtau = np.zeros(N)  # q^k tau_k
    wtau[0] = 1.0
    z = (2.0 * abs(p.a) + abs(p.b)) * abs(x)
    acc = Accumulator(control.compensated)
    acc.add(1.0)
    scale = math.exp(p.a * x)
    small = 0
    bx = p.b * x
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(0, N - 1):
            t = bx / (n + 1) * float(np.dot(g[n::-1], wtau[: n + 1]))
            if not math.isfinite(t):
                return SeriesResult(scale * acc.value, n + 1, math.inf, Status.OVERFLOW)
            tau[n + 1] = t
            wtau[n + 1] = t * qk[n + 1]
            acc.add(t)
            s = acc.value
            limit = control.rel_tol * abs(s)
            small = small + 1 if abs(t) <= limit else 0
            if small >= 2 or (p.b == 0.0):
                tail = exp_tail_bound(z, n + 1) if p.b != 0.0 else 0.0
                if tail <= limit:
                    value = scale * s
                    if not math.isfinite(value):
                        return SeriesResult(value, n + 2, math.inf, Status.OVERFLOW)
                    return SeriesResult(value, n + 2, scale * tail, Status.CONVERGED,
                                        _condition(acc.abs_total, s))
    s = acc.value
    tail = exp_tail_bound(z, N - 1)
    return SeriesResult(scale * s, N, scale * tail, Status.HIT_TERM_CAP,
                        _condition(acc.abs_total, s))


def r_value(params, x: float, control: EvalControl = DEFAULT_CONTROL) -> float:
    """Shorthand for ``eval_r(...).value``."""
    return eval_r(params, x, control).value


def djm_terms(params, x: float, k: int) -> list[float]:
    """The iterates y_0 .. y_k of the decomposition method, y_n = x^n/n! prod_{j<n}(a + b q^j).

    Uses the same term recurrence as the direct summation path, so running
    sums of this list are that path's partial sums.
    """
    p = _params(params)
    if k < 1:
        raise DomainError("k must be positive")
    out = [1.0]
    term = 1.0
    qj = 1.0
    for n in range(1, k + 1):
        term *= (p.a + p.b * qj) * x / n
        qj *= p.q
        out.append(term)
    return out


def coefficient_products(params, n_max: int, expand: bool = False) -> list[float]:
    """prod_{j<n}(a + b q^j) for n = 0..n_max, optionally through the q-binomial sum."""
    p = _params(params)
    f = qbinom_expand if expand else rising_q_product
    return [f(p.a, p.b, p.q, n) for n in range(n_max + 1)]


def _combine(parts: list[tuple[float, SeriesResult]]) -> SeriesResult:
    value = math.fsum(c * r.value for c, r in parts)
    tail = math.fsum(abs(c) * r.tail_bound for c, r in parts)
    terms = sum(r.terms_used for _, r in parts)
    status = Status.CONVERGED
    for _, r in parts:
        if r.status is Status.OVERFLOW:
            status = Status.OVERFLOW
        elif r.status is Status.HIT_TERM_CAP and status is Status.CONVERGED:
            status = Status.HIT_TERM_CAP
    return SeriesResult(value, terms, tail, status)


def derivative_r(params, x: float, m: int, control: EvalControl = DEFAULT_CONTROL) -> SeriesResult:
    """m-th derivative: sum_r q^(r(r-1)/2) [m choose r]_q a^(m-r) b^r R(a, b, q, q^r x)."""
    p = _params(params)
    if m < 1:
        raise DomainError("m must be at least 1")
    parts = []
    for r in range(m + 1):
        coef = p.q ** binom2(r) * gauss_binom(m, r, p.q) * p.a ** (m - r) * p.b**r
        parts.append((coef, eval_r(p, p.q**r * x, control)))
    return _combine(parts)


def derivative_shifted(params, x: float, m: int, control: EvalControl = DEFAULT_CONTROL) -> SeriesResult:
    """d/dx R(a, b, q, q^m x) = a q^m R(q^m x) + b q^m R(q^(m+1) x)."""
    p = _params(params)
    if m < 0:
        raise DomainError("m must be nonnegative")
    qm = p.q**m
    return _combine([(p.a * qm, eval_r(p, qm * x, control)),
                     (p.b * qm, eval_r(p, qm * p.q * x, control))])


def bounds_check(params, x: float, control: EvalControl = DEFAULT_CONTROL) -> IdentityReport:
    """Check e^(ax) <= R(a, b, q, x) <= e^((a+b)x) for a, b, x >= 0.

    Slack 1e-12 e^((a+b)x) on both sides. ``lhs`` is R; ``abs_err`` is the
    size of any violation beyond the slack (0 when the bounds hold).
    """
    p = _params(params)
    if p.a < 0 or p.b < 0:
        raise DomainError("bounds require a >= 0 and b >= 0")
    if x < 0:
        raise DomainError("bounds require x >= 0")
    r = eval_r(p, x, control).value
    lower = math.exp(p.a * x)
    upper = math.exp((p.a + p.b) * x)
    slack = 1e-12 * upper
    violation = max(0.0, lower - slack - r, r - upper - slack)
    return IdentityReport("bounds: e^(ax) <= R <= e^((a+b)x)", r, upper, violation,
                          violation / upper, violation == 0.0,
                          f"lower={lower!r}, upper={upper!r}",
                          extra=(("lower", lower), ("upper", upper)))


def canonical_form(params) -> tuple[ScalarParams, float]:
    """(1, b/a, q) and scale a, with R(a, b, q, x) = R(1, b/a, q, a x)."""
    p = _params(params)
    if p.a == 0:
        raise DomainError("canonical form needs a != 0; use R(0,b,q,x) = R(0,1,q,bx)")
    return ScalarParams(1.0, p.b / p.a, p.q), p.a


def beta_form_eval(params, x: float, control: EvalControl = DEFAULT_CONTROL, form: int = 3) -> float:
    """R through incomplete-beta coefficients, for 0 <= x <= 1.

    form 1: B(x; n, 1) / (n-1)!,  form 2: B(x; n, 1) / (B(n, 1) n!),
    form 3: I_x(n, 1) / n!; each multiplies prod_{j<n}(a + b q^j).
    """
    p = _params(params)
    if not 0.0 <= x <= 1.0:
        raise DomainError("x must lie in [0, 1]")
    if form not in (1, 2, 3):
        raise DomainError("form must be 1, 2 or 3")
    z = abs(p.a) + abs(p.b)
    acc = Accumulator(control.compensated)
    acc.add(1.0)
    if x == 0.0:
        return 1.0
    prod = 1.0
    qj = 1.0
    log_fact = 0.0
    for n in range(1, control.max_terms):
        prod *= p.a + p.b * qj
        qj *= p.q
        log_fact += math.log(n)
        if form == 1:
            w = beta_incomplete(x, n, 1.0) / math.exp(log_fact - math.log(n))
        elif form == 2:
            w = beta_incomplete(x, n, 1.0) / (beta(n, 1.0) * math.exp(log_fact))
        else:
            w = beta_regularized(x, n, 1.0) / math.exp(log_fact)
        term = prod * w
        acc.add(term)
        limit = control.rel_tol * abs(acc.value)
        if abs(term) <= limit and exp_tail_bound(z * x, n) <= limit:
            return acc.value
        if w == 0.0:
            return acc.value
    return acc.value


# -- relations between parameter sets ------------------------------------------

@dataclass(frozen=True)
class Relation:
    """A claimed equality R(lhs) = R(rhs) at argument x (rhs argument x * scale)."""

    name: str
    lhs: tuple[float, float]
    rhs: tuple[float, float]
    scale: float = 1.0
    meta: dict = field(default_factory=dict)


def scaling_relations(a: float, b: float, l: int, m: int) -> list[Relation]:
    """Scaling identities R(A, B, q, x) = R(1, B/A, q, A x) and R(0, B, q, x) = R(0, 1, q, B x).

    Instances built from bases a, b > 0 and integer exponents l, m, in the
    families B = +-b^m with A = 0; A = +-a^(+-m) paired with B = +-a^(-+m);
    and A = a^l, b^m mixtures.
    """
    if a <= 0 or b <= 0:
        raise DomainError("bases must be positive")
    rels = [
        Relation("scale-1: R(0, b^m) = R(0, 1, b^m x)", (0.0, b**m), (0.0, 1.0), b**m),
        Relation("scale-1: R(0, -b^m) = R(0, 1, -b^m x)", (0.0, -(b**m)), (0.0, 1.0), -(b**m)),
        Relation("scale-1a: R(0, a^l b^-m) = R(0, 1, a^l b^-m x)",
                 (0.0, a**l * b**-m), (0.0, 1.0), a**l * b**-m),
        Relation("scale-1b: R(0, b^-m) = R(0, 1, b^-m x)", (0.0, b**-m), (0.0, 1.0), b**-m),
        Relation("scale-2: R(a^m, a^m) = R(1, 1, a^m x)", (a**m, a**m), (1.0, 1.0), a**m),
        Relation("scale-2a: R(a^-m, a^m) = R(1, a^2m, a^-m x)",
                 (a**-m, a**m), (1.0, a ** (2 * m)), a**-m),
        Relation("scale-2a: R(-a^-m, -a^m) = R(1, a^2m, -a^-m x)",
                 (-(a**-m), -(a**m)), (1.0, a ** (2 * m)), -(a**-m)),
        Relation("scale-2b: R(a^m, a^-m) = R(1, a^-2m, a^m x)",
                 (a**m, a**-m), (1.0, a ** (-2 * m)), a**m),
        Relation("scale-2b: R(-a^m, -a^-m) = R(1, a^-2m, -a^m x)",
                 (-(a**m), -(a**-m)), (1.0, a ** (-2 * m)), -(a**m)),
        Relation("scale-2c: R(-a^m, a^-m) = R(1, -a^-2m, -a^m x)",
                 (-(a**m), a**-m), (1.0, -(a ** (-2 * m))), -(a**m)),
        Relation("scale-2d: R(a^m, -a^-m) = R(1, -a^-2m, a^m x)",
                 (a**m, -(a**-m)), (1.0, -(a ** (-2 * m))), a**m),
        Relation("scale-2e: R(-a^-m, a^m) = R(1, -a^2m, -a^-m x)",
                 (-(a**-m), a**m), (1.0, -(a ** (2 * m))), -(a**-m)),
        Relation("scale-2f: R(a^-m, -a^m) = R(1, -a^2m, a^-m x)",
                 (a**-m, -(a**m)), (1.0, -(a ** (2 * m))), a**-m),
        Relation("scale-3: R(a^l, b^m) = R(1, a^-l b^m, a^l x)",
                 (a**l, b**m), (1.0, a**-l * b**m), a**l),
        Relation("scale-3a: R(a^l b^-m, b^m) = R(1, a^-l b^2m, a^l b^-m x)",
                 (a**l * b**-m, b**m), (1.0, a**-l * b ** (2 * m)), a**l * b**-m),
        Relation("scale-3b: R(a^-l b^m, b^m) = R(1, a^l, a^-l b^m x)",
                 (a**-l * b**m, b**m), (1.0, a**l), a**-l * b**m),
        Relation("scale-3c: R(a^l b^-m, a^m) = R(1, a^(m-l) b^m, a^l b^-m x)",
                 (a**l * b**-m, a**m), (1.0, a ** (m - l) * b**m), a**l * b**-m),
        Relation("scale-3d: R(a^-l b^m, a^m) = R(1, a^(l+m) b^-m, a^-l b^m x)",
                 (a**-l * b**m, a**m), (1.0, a ** (l + m) * b**-m), a**-l * b**m),
    ]
    return rels


def contiguous_relations(a: float, b: float) -> list[Relation]:
    """R at a +- 1 and/or b +- 1 rewritten in canonical form."""
    rels = []
    for s in (1.0, -1.0):
        sign = "+" if s > 0 else "-"
        if a + s != 0:
            rels.append(Relation(f"contiguous-1: R(a{sign}1, b)", (a + s, b), (1.0, b / (a + s)), a + s))
            rels.append(Relation(f"contiguous-3: R(a{sign}1, b{sign}1)", (a + s, b + s),
                                 (1.0, (b + s) / (a + s)), a + s))
        if a != 0:
            rels.append(Relation(f"contiguous-2: R(a, b{sign}1)", (a, b + s), (1.0, (b + s) / a), a))
    return rels


def check_relation(rel: Relation, q: float, x: float, rtol: float = 1e-11,
                   control: EvalControl = DEFAULT_CONTROL) -> IdentityReport:
    lhs = eval_r(ScalarParams(rel.lhs[0], rel.lhs[1], q), x, control).value
    rhs = eval_r(ScalarParams(rel.rhs[0], rel.rhs[1], q), rel.scale * x, control).value
    return compare(rel.name, lhs, rhs, atol=0.0, rtol=rtol, note=f"q={q!r}, x={x!r}")


def check_beta_forms(params, x: float, rtol: float = 1e-10,
                     control: EvalControl = DEFAULT_CONTROL) -> list[IdentityReport]:
    p = _params(params)
    ref = eval_r(p, x, control).value
    return [compare(f"beta-form-{f}", beta_form_eval(p, x, control, f), ref, atol=0.0, rtol=rtol,
                    note=f"a={p.a!r}, b={p.b!r}, q={p.q!r}, x={x!r}")
            for f in (1, 2, 3)]
