"""Independent RK4 integrator for y'(t) = A y(t) + B y(qt), y(0) = y0.

The delayed value y(qt) is read from a cubic Hermite interpolant of the
steps already taken. Near t = 0 the point qt falls inside the step being
computed, so that step is iterated to a fixed point of its own interpolant.
This module deliberately does not import the series evaluators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcomb import DomainError, check_q

FIXED_POINT_TOL = 1e-13
FIXED_POINT_CAP = 50


class NonContractionError(ArithmeticError):
    """The per-step fixed-point iteration did not settle; use a smaller dt."""


@dataclass(frozen=True, eq=False)
class DenseSolution:
    nodes: np.ndarray      # (N+1,), uniform, nodes[0] = 0
    values: np.ndarray     # (N+1, d)
    derivs: np.ndarray     # (N+1, d)
    x_max: float
    A: np.ndarray
    B: np.ndarray
    q: float
    scalar: bool = True

    @property
    def h(self) -> float:
        return self.x_max / (len(self.nodes) - 1)


def _system(params):
    """(A, B, y0, q, scalar) from scalar (a, b, q) or matrix (A, B, y0, q) parameters."""
    if hasattr(params, "A"):
        A = np.atleast_2d(np.asarray(params.A, dtype=float))
        B = np.atleast_2d(np.asarray(params.B, dtype=float))
        y0 = np.asarray(params.y0, dtype=float).reshape(-1)
        return A, B, y0, check_q(params.q), False
    if hasattr(params, "a"):
        a, b, q = params.a, params.b, params.q
    else:
        a, b, q = params
    return (np.array([[float(a)]]), np.array([[float(b)]]), np.array([1.0]), check_q(q), True)


def _hermite(y0, f0, y1, f1, h, theta):
    t2 = theta * theta
    t3 = t2 * theta
    return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + theta) * h * f0
            + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * f1)


def _hermite_deriv(y0, f0, y1, f1, h, theta):
    t2 = theta * theta
    return ((6 * t2 - 6 * theta) * (y0 - y1) / h + (3 * t2 - 4 * theta + 1) * f0
            + (3 * t2 - 2 * theta) * f1)


def solve_pantograph(params, x_max: float, dt: float = 1e-3) -> DenseSolution:
    """Classical RK4 on a uniform grid with step h = x_max / ceil(x_max / dt)."""
    if not x_max > 0:
        raise DomainError("x_max must be positive")
    if not (dt > 0 and dt <= x_max / 10.0):
        raise DomainError("dt must lie in (0, x_max/10]")
    A, B, y0, q, scalar = _system(params)
    n_steps = int(math.ceil(x_max / dt - 1e-9))
    h = x_max / n_steps
    d = y0.shape[0]
    ys = np.empty((n_steps + 1, d))
    fs = np.empty((n_steps + 1, d))
    ys[0] = y0
    fs[0] = (A + B) @ y0

    def history(s, i, cur):
        # y(s) for s <= t_{i+1}; cur holds the tentative end of step i
        k = min(int(s / h), i)
        theta = s / h - k
        if k < i:
            if theta == 0.0:
                return ys[k]
            return _hermite(ys[k], fs[k], ys[k + 1], fs[k + 1], h, theta)
        return _hermite(ys[i], fs[i], cur[0], cur[1], h, theta)

    for i in range(n_steps):
        t = i * h
        y = ys[i]
        f0 = fs[i]
        implicit = q * (t + h) > t
        cur = (y + h * f0, f0)
        for _ in range(FIXED_POINT_CAP):
            k1 = f0
            yd = history(q * (t + 0.5 * h), i, cur)
            k2 = A @ (y + 0.5 * h * k1) + B @ yd
            k3 = A @ (y + 0.5 * h * k2) + B @ yd
            y_new = y + h * k1 / 6.0 + h * k2 / 3.0 + h * k3 / 3.0
            yd_end = history(q * (t + h), i, cur)
            k4 = A @ (y + h * k3) + B @ yd_end
            y_new = y_new + h * k4 / 6.0
            f_new = A @ y_new + B @ yd_end
            if not implicit:
                break
            change = np.max(np.abs(y_new - cur[0]) / (1.0 + np.abs(y_new)))
            change_f = np.max(np.abs(f_new - cur[1]) / (1.0 + np.abs(f_new)))
            cur = (y_new, f_new)
            if max(change, change_f) <= FIXED_POINT_TOL:
                break
        else:
            raise NonContractionError(f"step at t={t!r} did not converge in {FIXED_POINT_CAP} iterations")
        if implicit:
            y_new, f_new = cur
            # refresh the end derivative with the settled interpolant
            f_new = A @ y_new + B @ history(q * (t + h), i, cur)
        ys[i + 1] = y_new
        fs[i + 1] = f_new
    nodes = np.linspace(0.0, x_max, n_steps + 1)
    for arr in (ys, fs, nodes):
        arr.setflags(write=False)
    return DenseSolution(nodes, ys, fs, float(x_max), A, B, q, scalar)


def _locate(sol: DenseSolution, t: float):
    if not (-1e-12 * sol.x_max <= t <= sol.x_max * (1 + 1e-12)):
        raise DomainError(f"t={t!r} outside [0, {sol.x_max!r}]")
    t = min(max(t, 0.0), sol.x_max)
    n = len(sol.nodes) - 1
    h = sol.h
    k = min(int(t / h), n - 1)
    return k, t / h - k, h


def interpolate(sol: DenseSolution, t: float):
    """Cubic Hermite value at t; exact at the nodes."""
    k, theta, h = _locate(sol, float(t))
    if theta == 0.0:
        v = sol.values[k]
    elif theta == 1.0:
        v = sol.values[k + 1]
    else:
        v = _hermite(sol.values[k], sol.derivs[k], sol.values[k + 1], sol.derivs[k + 1], h, theta)
    return float(v[0]) if sol.scalar else np.array(v)


def interpolate_deriv(sol: DenseSolution, t: float):
    """Derivative of the Hermite interpolant at t."""
    k, theta, h = _locate(sol, float(t))
    v = _hermite_deriv(sol.values[k], sol.derivs[k], sol.values[k + 1], sol.derivs[k + 1], h, theta)
    return float(v[0]) if sol.scalar else np.array(v)


def residual(sol: DenseSolution, t: float):
    """y'(t) - A y(t) - B y(qt) for the interpolant; zero at nodes by construction."""
    y = np.atleast_1d(interpolate(sol, t))
    yd = np.atleast_1d(interpolate(sol, sol.q * t))
    r = np.atleast_1d(interpolate_deriv(sol, t)) - sol.A @ y - sol.B @ yd
    return float(r[0]) if sol.scalar else r
