"""Matrix series for the system Y'(x) = A Y(x) + B Y(qx), Y(0) = Y0.

Y(x) = (I + sum_n x^n/n! (A + q^(n-1) B) ... (A + q B)(A + B)) Y0, where each new
factor multiplies on the left and carries the highest power of q. Only the
action on Y0 is formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numerics import exp_tail_bound
from .core import DEFAULT_CONTROL, EvalControl, Status
from .qcomb import DomainError, binom2, check_q, gauss_binom
from .reports import IdentityReport

COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class MatrixParams:
    A: np.ndarray
    B: np.ndarray
    y0: np.ndarray
    q: float

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        y0 = np.array(self.y0, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise DomainError("A must be a nonempty square matrix")
        if B.shape != A.shape:
            raise DomainError(f"B has shape {B.shape}, expected {A.shape}")
        if y0.shape[0] != A.shape[0]:
            raise DomainError(f"y0 has length {y0.shape[0]}, expected {A.shape[0]}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B)) and np.all(np.isfinite(y0))):
            raise DomainError("entries must be finite")
        for arr in (A, B, y0):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "q", check_q(self.q))

    @property
    def dim(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class MatrixSeriesResult:
    value: np.ndarray
    terms_used: int
    tail_bound: float
    status: Status

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def eval_r_matrix(mparams: MatrixParams, x: float, control: EvalControl = DEFAULT_CONTROL,
                  arg_matrix=None) -> MatrixSeriesResult:
    """Y(x) by the vector recurrence T_n = (A + q^(n-1) B) T_(n-1) x / n.

    With ``arg_matrix`` M every factor becomes M (A + q^(n-1) B); this is how a
    matrix-valued argument such as (A + I) x enters the contiguous relations.
    Truncation uses the Frobenius majorant ((|MA| + |MB|) |x|)^n / n!, M = I by default.
    """
    p = mparams
    x = float(x)
    M = None if arg_matrix is None else np.asarray(arg_matrix, dtype=float)
    if M is not None and M.shape != p.A.shape:
        raise DomainError(f"argument matrix has shape {M.shape}, expected {p.A.shape}")
    if M is None:
        norm = np.linalg.norm(p.A) + np.linalg.norm(p.B)
    else:
        norm = np.linalg.norm(M @ p.A) + np.linalg.norm(M @ p.B)
    z = float(norm) * abs(x)
    total = p.y0.copy()
    comp = np.zeros_like(total)
    term = p.y0.copy()
    qj = 1.0
    small = 0
    if x == 0.0:
        return MatrixSeriesResult(total, 1, 0.0, Status.CONVERGED)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, control.max_terms):
            term = (p.A @ term + qj * (p.B @ term)) * (x / n)
            if M is not None:
                term = M @ term
            qj *= p.q
            if not np.all(np.isfinite(term)):
                return MatrixSeriesResult(total + comp, n, math.inf, Status.OVERFLOW)
            # Neumaier compensation, componentwise
            t = total + term
            comp += np.where(np.abs(total) >= np.abs(term), (total - t) + term, (term - t) + total)
            total = t
            size = float(np.linalg.norm(total + comp))
            limit = control.rel_tol * size
            small = small + 1 if float(np.linalg.norm(term)) <= limit else 0
            if small >= 2:
                tail = exp_tail_bound(z, n) * float(np.linalg.norm(p.y0))
                if tail <= limit:
                    return MatrixSeriesResult(total + comp, n + 1, tail, Status.CONVERGED)
    tail = exp_tail_bound(z, control.max_terms - 1) * float(np.linalg.norm(p.y0))
    return MatrixSeriesResult(total + comp, control.max_terms, tail, Status.HIT_TERM_CAP)


def residual_check_matrix(mparams: MatrixParams, x_grid, control: EvalControl = DEFAULT_CONTROL,
                          h: float = 1e-5, tol: float = 1e-6) -> IdentityReport:
    """Centered differences of Y against A Y(x) + B Y(qx), mixed error per component."""
    p = mparams
    worst = (0.0, 0.0, 0.0, "")
    for x in x_grid:
        fd = (eval_r_matrix(p, x + h, control).value - eval_r_matrix(p, x - h, control).value) / (2 * h)
        rhs = p.A @ eval_r_matrix(p, x, control).value + p.B @ eval_r_matrix(p, p.q * x, control).value
        err = np.abs(fd - rhs) / (1.0 + np.abs(rhs))
        i = int(np.argmax(err))
        if err[i] >= worst[0]:
            worst = (float(err[i]), float(fd[i]), float(rhs[i]), f"x={float(x)!r}, component {i}")
    return IdentityReport("matrix DDE residual", worst[1], worst[2], abs(worst[1] - worst[2]),
                          worst[0], worst[0] <= tol, worst[3])


# -- products and relations ---------------------------------------------------------

def ordered_product(A, B, q: float, n: int) -> np.ndarray:
    """(A + q^(n-1) B) ... (A + q B)(A + B); identity for n = 0."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    out = np.eye(A.shape[0])
    for j in range(n):
        out = (A + q**j * B) @ out
    return out


def qbinom_matrix_expand(A, B, q: float, n: int) -> np.ndarray:
    """sum_r q^(r(r-1)/2) [n choose r]_q A^(n-r) B^r; equals the ordered product when AB = BA."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    d = A.shape[0]
    out = np.zeros((d, d))
    for r in range(n + 1):
        coef = q ** binom2(r) * gauss_binom(n, r, q)
        out += coef * np.linalg.matrix_power(A, n - r) @ np.linalg.matrix_power(B, r)
    return out


@dataclass(frozen=True, eq=False)
class ContiguousForm:
    """R(shifted) Y0 equals R(reduced) Y0 evaluated with argument matrix ``arg_matrix`` x."""

    shifted: MatrixParams
    reduced: MatrixParams
    arg_matrix: np.ndarray
    description: str


def _checked_inverse(M: np.ndarray, label: str) -> np.ndarray:
    cond = float(np.linalg.cond(M))
    if not cond < COND_LIMIT:
        raise DomainError(f"{label} is near singular (condition number {cond:.3e})")
    return np.linalg.inv(M)


def contiguous_matrix(mparams: MatrixParams, variant: str, sign: int = 1) -> ContiguousForm:
    """Rewrite R(A +- I, B), R(A, B +- I) or R(A +- I, B +- I) with I in the first slot.

    variant "A":    R(A+sI, B)    = R(I, (A+sI)^-1 B,      q, (A+sI) x)
    variant "B":    R(A, B+sI)    = R(I, A^-1 (B+sI),      q, A x)
    variant "both": R(A+sI, B+sI) = R(I, (A+sI)^-1 (B+sI), q, (A+sI) x)
    Each factor A' + q^k B' equals M (I + q^k M^-1 B'), which is exact for
    noncommuting matrices as long as M is invertible.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    p = mparams
    eye = np.eye(p.dim)
    s = "+" if sign > 0 else "-"
    if variant == "A":
        A2, B2, M = p.A + sign * eye, p.B, p.A + sign * eye
        desc = f"R(A{s}I, B, q, xI) = R(I, (A{s}I)^-1 B, q, (A{s}I)x)"
    elif variant == "B":
        A2, B2, M = p.A, p.B + sign * eye, p.A
        desc = f"R(A, B{s}I, q, xI) = R(I, A^-1 (B{s}I), q, Ax)"
    elif variant == "both":
        A2, B2, M = p.A + sign * eye, p.B + sign * eye, p.A + sign * eye
        desc = f"R(A{s}I, B{s}I, q, xI) = R(I, (A{s}I)^-1 (B{s}I), q, (A{s}I)x)"
    else:
        raise DomainError("variant must be 'A', 'B' or 'both'")
    C = _checked_inverse(M, "matrix to invert") @ B2
    shifted = MatrixParams(A2, B2, p.y0, p.q)
    reduced = MatrixParams(eye, C, p.y0, p.q)
    return ContiguousForm(shifted, reduced, M, desc)


def check_contiguous(form: ContiguousForm, x: float, rtol: float = 1e-10,
                     control: EvalControl = DEFAULT_CONTROL) -> IdentityReport:
    lhs = eval_r_matrix(form.shifted, x, control).value
    rhs = eval_r_matrix(form.reduced, x, control, arg_matrix=form.arg_matrix).value
    err = float(np.linalg.norm(lhs - rhs))
    scale = float(max(np.linalg.norm(lhs), np.linalg.norm(rhs)))
    rel = err / scale if scale > 0 else 0.0
    return IdentityReport(form.description, float(np.linalg.norm(lhs)), float(np.linalg.norm(rhs)),
                          err, rel, rel <= rtol, f"x={x!r}")


def property_forms(mparams: MatrixParams, m: int = 1) -> list[tuple[str, MatrixParams, MatrixParams, np.ndarray]]:
    """Power-scaling properties as (name, lhs params, reduced params, argument matrix).

    R(0, +-B^m, q, xI) = R(0, I, q, +-B^m x) and R(A^m, A^m, q, xI) = R(I, I, q, A^m x).
    """
    p = mparams
    eye = np.eye(p.dim)
    zero = np.zeros_like(eye)
    Bm = np.linalg.matrix_power(p.B, m)
    Am = np.linalg.matrix_power(p.A, m)
    out = []
    for s, tag in ((1.0, "+"), (-1.0, "-")):
        out.append((f"R(0, {tag}B^m) = R(0, I, {tag}B^m x)", MatrixParams(zero, s * Bm, p.y0, p.q),
                    MatrixParams(zero, eye, p.y0, p.q), s * Bm))
    out.append(("R(A^m, A^m) = R(I, I, A^m x)", MatrixParams(Am, Am, p.y0, p.q),
                MatrixParams(eye, eye, p.y0, p.q), Am))
    return out
