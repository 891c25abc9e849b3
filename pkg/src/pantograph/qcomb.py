"""q-analog combinatorics: Gaussian binomials, q-products, q-binomial expansion."""

from __future__ import annotations

import math

from ._numerics import Accumulator


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a function."""


def check_q(q: float) -> float:
    q = float(q)
    if not (0.0 < q < 1.0):
        raise DomainError("q must lie in (0,1)")
    return q


def binom2(r: int) -> int:
    """Exponent r(r-1)/2 that accompanies the r-th q-binomial term."""
    return r * (r - 1) // 2


def gauss_binom(n: int, r: int, q: float) -> float:
    """Gaussian binomial coefficient ``[n choose r]_q``.

    Evaluated as a running product of ratios (1 - q^(n-i)) / (1 - q^(i+1)),
    so every partial factor stays O(1). Returns 0 outside ``0 <= r <= n``
    (the lower index -1 is needed by the derivative recursion).
    """
    q = check_q(q)
    if n < 0:
        raise DomainError("n must be nonnegative")
    if r < 0 or r > n:
        return 0.0
    r = min(r, n - r)
    value = 1.0
    for i in range(r):
        value *= -math.expm1((n - i) * math.log(q)) / -math.expm1((i + 1) * math.log(q))
    return value


def gauss_binom_row(n: int, q: float) -> list[float]:
    """All coefficients ``[n choose r]_q`` for r = 0..n, built incrementally."""
    q = check_q(q)
    lq = math.log(q)
    row = [1.0]
    for r in range(1, n + 1):
        row.append(row[-1] * math.expm1((n - r + 1) * lq) / math.expm1(r * lq))
    return row


def rising_q_product(a: float, b: float, q: float, n: int) -> float:
    """Product ``(a + b)(a + bq)...(a + bq^(n-1))``; 1 for n = 0.

    Overflow propagates as ``inf`` (callers translate it to a status flag).
    """
    q = check_q(q)
    if n < 0:
        raise DomainError("n must be nonnegative")
    value = 1.0
    qj = 1.0
    for _ in range(n):
        value *= a + b * qj
        qj *= q
    return value


def qbinom_expand(a: float, b: float, q: float, n: int) -> float:
    """Right-hand side of the q-binomial theorem.

    sum_{r=0}^{n} q^(r(r-1)/2) [n choose r]_q a^(n-r) b^r, which equals
    :func:`rising_q_product` for every n.
    """
    q = check_q(q)
    if n < 0:
        raise DomainError("n must be nonnegative")
    row = gauss_binom_row(n, q)
    acc = Accumulator()
    for r, coef in enumerate(row):
        try:
            acc.add(q ** binom2(r) * coef * a ** (n - r) * b**r)
        except OverflowError:
            return math.inf
    return acc.value
