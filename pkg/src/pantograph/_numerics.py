"""Small numeric helpers shared across modules."""

from __future__ import annotations

import math


class Accumulator:
    """Running sum with optional Neumaier compensation."""

    __slots__ = ("total", "comp", "compensated", "abs_total")

    def __init__(self, compensated: bool = True):
        self.total = 0.0
        self.comp = 0.0
        self.abs_total = 0.0
        self.compensated = compensated

    def add(self, term: float) -> None:
        self.abs_total += abs(term)
        if not self.compensated:
            self.total += term
            return
        t = self.total + term
        if abs(self.total) >= abs(term):
            self.comp += (self.total - t) + term
        else:
            self.comp += (term - t) + self.total
        self.total = t

    @property
    def value(self) -> float:
        return self.total + self.comp


def exp_tail_bound(z: float, n: int) -> float:
    """Upper bound for sum_{k > n} z^k / k!  (z >= 0).

    Uses the geometric majorant t_{n+1} / (1 - z/(n+2)) once n + 2 > z;
    before that point the full e^z is returned.
    """
    if z <= 0.0:
        return 0.0
    if n + 2 <= z:
        return math.exp(z) if z < 709.0 else math.inf
    log_t = (n + 1) * math.log(z) - math.lgamma(n + 2)
    if log_t < -745.0:
        return 0.0
    if log_t > 709.0:
        return math.inf
    return math.exp(log_t) / (1.0 - z / (n + 2))


def ml_tail_bound(z: float, alpha: float, n: int) -> float:
    """Upper bound for sum_{k > n} z^k / Gamma(alpha k + 1)  (z >= 0).

    The ratio of consecutive terms, z Gamma(alpha k + 1) / Gamma(alpha k + alpha + 1),
    decreases in k, so once it is below 1 the tail is dominated by a geometric series.
    """
    if z <= 0.0:
        return 0.0
    lz = math.log(z)
    k = n + 1
    ratio = math.exp(lz + math.lgamma(alpha * k + 1) - math.lgamma(alpha * k + alpha + 1))
    if ratio >= 1.0:
        return math.inf
    log_t = k * lz - math.lgamma(alpha * k + 1)
    if log_t < -745.0:
        return 0.0
    if log_t > 709.0:
        return math.inf
    return math.exp(log_t) / (1.0 - ratio)


def mixed_error(value: float, reference: float) -> float:
    """|value - reference| / (1 + |reference|)."""
    return abs(value - reference) / (1.0 + abs(reference))


def rel_error(value: float, reference: float) -> float:
    if reference == 0.0:
        return 0.0 if value == 0.0 else math.inf
    return abs(value - reference) / abs(reference)
