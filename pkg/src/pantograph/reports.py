"""Result records shared by the verification routines."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of checking one identity numerically.

    ``passed`` holds iff ``abs_err <= atol`` or ``rel_err <= rtol``.
    """

    name: str
    lhs: float
    rhs: float
    abs_err: float
    rel_err: float
    passed: bool
    note: str = ""
    extra: tuple = ()

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
            "abs_err": _jsonable(self.abs_err),
            "rel_err": _jsonable(self.rel_err),
            "pass": bool(self.passed),
            "note": self.note,
        }
        for key, value in self.extra:
            out[key] = _jsonable(value)
        return out


def compare(name: str, lhs: float, rhs: float, atol: float, rtol: float | None = None,
            note: str = "") -> IdentityReport:
    """Build a report comparing two numbers under an absolute/relative tolerance."""
    if rtol is None:
        rtol = atol
    abs_err = abs(lhs - rhs)
    scale = max(abs(lhs), abs(rhs))
    rel_err = abs_err / scale if scale > 0 else 0.0
    if math.isnan(abs_err):
        abs_err = rel_err = math.inf
    passed = abs_err <= atol or rel_err <= rtol
    return IdentityReport(name, lhs, rhs, abs_err, rel_err, passed, note)


def worst(reports: list[IdentityReport], name: str | None = None) -> IdentityReport:
    """The report furthest from passing; failures rank first, then largest rel_err."""
    if not reports:
        raise ValueError("no reports")
    pick = max(reports, key=lambda r: (not r.passed, min(r.rel_err, r.abs_err)))
    if name is None:
        return pick
    return IdentityReport(name, pick.lhs, pick.rhs, pick.abs_err, pick.rel_err,
                          all(r.passed for r in reports), pick.note, pick.extra)


def _jsonable(v):
    if isinstance(v, (bool, str)) or v is None:
        return v
    if isinstance(v, int) and not isinstance(v, bool):
        return v
    v = float(v)
    return v if math.isfinite(v) else str(v)
