"""Fractional-order variant R_alpha(a, b, q, x).

R_alpha(a, b, q, x) = 1 + sum_n x^(alpha n) / Gamma(alpha n + 1) prod_{j<n} (a + b q^(alpha j))
solves the Caputo equation D^alpha y(x) = a y(x) + b y(qx), y(0) = 1, for 0 < alpha <= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._numerics import Accumulator, ml_tail_bound
from .core import DEFAULT_CONTROL, EvalControl, ScalarParams, SeriesResult, Status, _params
from .qcomb import DomainError
from .reports import IdentityReport, compare


@dataclass(frozen=True)
class FractionalParams:
    base: ScalarParams
    alpha: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError("alpha must lie in (0, 1]")


def _fparams(fp, alpha=None) -> FractionalParams:
    if isinstance(fp, FractionalParams):
        return fp
    return FractionalParams(_params(fp), float(alpha))


def _gamma_ratio(alpha: float, n: int) -> float:
    """Gamma(alpha (n-1) + 1) / Gamma(alpha n + 1)."""
    if alpha == 1.0:
        return 1.0 / n
    hi = alpha * n + 1.0
    lo = hi - alpha
    if hi < 170.0:
        return math.gamma(lo) / math.gamma(hi)
    return math.exp(math.lgamma(lo) - math.lgamma(hi))


def alpha_coefficients(fparams, n_max: int) -> list[float]:
    """Coefficients c_n of x^(alpha n), built by the term ratio the evaluator uses."""
    fp = _fparams(fparams)
    p = fp.base
    out = [1.0]
    c = 1.0
    for n in range(1, n_max + 1):
        # direct power: a running product drifts and a + b q^(alpha j) may cancel
        c *= (p.a + p.b * p.q ** (fp.alpha * (n - 1))) * _gamma_ratio(fp.alpha, n)
        out.append(c)
    return out


def alpha_terms(fparams, x: float, k: int) -> list[float]:
    """Terms c_n x^(alpha n) for n = 0..k."""
    fp = _fparams(fparams)
    if x < 0:
        raise DomainError("x must be nonnegative")
    coef = alpha_coefficients(fp, k)
    if x == 0.0:
        return [1.0] + [0.0] * k
    xa = math.exp(fp.alpha * math.log(x))
    out = []
    power = 1.0
    for c in coef:
        out.append(c * power)
        power *= xa
    return out


def eval_r_alpha(fparams, x: float, control: EvalControl = DEFAULT_CONTROL) -> SeriesResult:
    """R_alpha(a, b, q, x) for x >= 0, truncated by the Mittag-Leffler majorant.

    The tail is bounded by sum_{n>N} ((|a|+|b|) x^alpha)^n / Gamma(alpha n + 1).
    """
    fp = _fparams(fparams)
    p = fp.base
    x = float(x)
    if x < 0:
        raise DomainError("x must be nonnegative")
    if x == 0.0:
        return SeriesResult(1.0, 1, 0.0, Status.CONVERGED)
    xa = math.exp(fp.alpha * math.log(x))
    z = (abs(p.a) + abs(p.b)) * xa
    qa = p.q**fp.alpha
    acc = Accumulator(control.compensated)
    acc.add(1.0)
    term = 1.0
    qj = 1.0
    small = 0
    for n in range(1, control.max_terms):
        term *= (p.a + p.b * qj) * xa * _gamma_ratio(fp.alpha, n)
        qj *= qa
        if not math.isfinite(term):
            return SeriesResult(acc.value, n, math.inf, Status.OVERFLOW)
        acc.add(term)
        total = acc.value
        limit = control.rel_tol * abs(total)
        small = small + 1 if abs(term) <= limit else 0
        if small >= 2:
            tail = ml_tail_bound(z, fp.alpha, n)
            if tail <= limit:
                cond = acc.abs_total / abs(total) if total else math.inf
                return SeriesResult(total, n + 1, tail, Status.CONVERGED, cond)
    total = acc.value
    return SeriesResult(total, control.max_terms, ml_tail_bound(z, fp.alpha, control.max_terms - 1),
                        Status.HIT_TERM_CAP)


def caputo_recurrence_check(fparams, n_max: int, rtol: float = 1e-12) -> IdentityReport:
    """Check that the series satisfies D^alpha y = a y + b y(qx) term by term.

    The Caputo power rule D^alpha x^(alpha n) = Gamma(alpha n + 1)/Gamma(alpha(n-1) + 1) x^(alpha(n-1))
    turns the equation into c_n Gamma(alpha n + 1) = (a + b q^(alpha(n-1))) c_(n-1) Gamma(alpha(n-1) + 1).
    Both sides use log-gamma; the c_n come from :func:`alpha_coefficients`.
    """
    fp = _fparams(fparams)
    if not 1 <= n_max <= 100:
        raise DomainError("n_max must lie in 1..100")
    p = fp.base
    al = fp.alpha
    coef = alpha_coefficients(fp, n_max)
    reports = []
    for n in range(1, n_max + 1):
        lhs = coef[n] * math.exp(math.lgamma(al * n + 1.0))
        rhs = (p.a + p.b * p.q ** (al * (n - 1))) * coef[n - 1] * math.exp(math.lgamma(al * (n - 1) + 1.0))
        reports.append(compare("caputo term recurrence", lhs, rhs, atol=1e-300, rtol=rtol, note=f"n={n}"))
    bad = [r for r in reports if not r.passed]
    pick = bad[0] if bad else max(reports, key=lambda r: r.rel_err)
    return IdentityReport(f"caputo term recurrence (alpha={al!r})", pick.lhs, pick.rhs, pick.abs_err,
                          pick.rel_err, not bad, pick.note)


@dataclass(frozen=True)
class FractionalRelation:
    name: str
    lhs: tuple[float, float]
    rhs: tuple[float, float]
    scale: float


def fractional_scaling_relations(a: float, b: float, l: int, m: int, alpha: float) -> list[FractionalRelation]:
    """R_alpha(A, B, q, x) = R_alpha(1, B/A, q, A^(1/alpha) x) for A > 0 and
    R_alpha(0, B, q, x) = R_alpha(0, 1, q, B^(1/alpha) x) for B > 0.

    The coefficient of x^(alpha n) is homogeneous of degree n in (A, B), so a
    factor pulled out of the parameters enters the argument as its 1/alpha power.
    """
    if a <= 0 or b <= 0:
        raise DomainError("bases must be positive")
    B = b ** (alpha * m)
    A = a ** (alpha * l)
    return [
        FractionalRelation("frac-scale-1: R_alpha(0, b^(alpha m)) = R_alpha(0, 1, b^m x)",
                           (0.0, B), (0.0, 1.0), B ** (1.0 / alpha)),
        FractionalRelation("frac-scale-2: R_alpha(a^(alpha m), a^(alpha m)) = R_alpha(1, 1, a^m x)",
                           (a ** (alpha * m), a ** (alpha * m)), (1.0, 1.0), a**m),
        FractionalRelation("frac-scale-3: R_alpha(a^(alpha l), b^(alpha m)) = R_alpha(1, B/A, a^l x)",
                           (A, B), (1.0, B / A), a**l),
    ]


def check_fractional_relation(rel: FractionalRelation, q: float, alpha: float, x: float,
                              rtol: float = 1e-11) -> IdentityReport:
    lhs = eval_r_alpha(FractionalParams(ScalarParams(rel.lhs[0], rel.lhs[1], q), alpha), x).value
    rhs = eval_r_alpha(FractionalParams(ScalarParams(rel.rhs[0], rel.rhs[1], q), alpha), rel.scale * x).value
    return compare(rel.name, lhs, rhs, atol=0.0, rtol=rtol, note=f"q={q!r}, alpha={alpha!r}, x={x!r}")
