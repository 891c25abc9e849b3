"""Series solution of the pantograph equation y'(x) = a y(x) + b y(qx), y(0) = 1."""

from .core import (DEFAULT_CONTROL, EvalControl, ScalarParams, SeriesResult, Status, beta_form_eval,
                   bounds_check, canonical_form, derivative_r, derivative_shifted, djm_terms, eval_r)
from .dde import DenseSolution, interpolate, solve_pantograph
from .fractional import FractionalParams, caputo_recurrence_check, eval_r_alpha
from .identities import (ClosedForm, ConvergenceGuard, quad_exp_r, rhs_integral_0_to_x,
                         rhs_integral_x_to_inf, rhs_kummer_form, rhs_laguerre_form, rhs_scaled,
                         rhs_u_form)
from .matrix import MatrixParams, MatrixSeriesResult, contiguous_matrix, eval_r_matrix, residual_check_matrix
from .qcomb import DomainError, gauss_binom, qbinom_expand, rising_q_product
from .reports import IdentityReport

__all__ = [
    "DEFAULT_CONTROL", "EvalControl", "ScalarParams", "SeriesResult", "Status", "beta_form_eval",
    "bounds_check", "canonical_form", "derivative_r", "derivative_shifted", "djm_terms", "eval_r",
    "DenseSolution", "interpolate", "solve_pantograph", "FractionalParams", "caputo_recurrence_check",
    "eval_r_alpha", "ClosedForm", "ConvergenceGuard", "quad_exp_r", "rhs_integral_0_to_x",
    "rhs_integral_x_to_inf", "rhs_kummer_form", "rhs_laguerre_form", "rhs_scaled", "rhs_u_form",
    "MatrixParams", "MatrixSeriesResult", "contiguous_matrix", "eval_r_matrix", "residual_check_matrix",
    "DomainError", "gauss_binom", "qbinom_expand", "rising_q_product", "IdentityReport",
]
