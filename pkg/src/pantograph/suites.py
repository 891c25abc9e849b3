"""Randomized verification suites shared by the command line and the tests.

Each suite takes a numpy Generator and a case count and returns a flat list of
IdentityReports. Suites are pure functions of their inputs, so a fixed seed
gives identical reports.
"""

from __future__ import annotations

import math

import numpy as np

from . import core, dde, fractional, identities, matrix, qcomb, special
from .core import ScalarParams
from .reports import IdentityReport, compare

STANDARD_SUITE = ((-1.0, 0.5, 0.5), (1.0, 1.0, 0.5), (0.3, -0.2, 0.8))
GAMMA_POINTS = (0.01, 1.0, 10.0)
INTEGRAL_AB = ((0.3, 0.4), (0.1, -0.2))
INTEGRAL_Q = (0.3, 0.5, 0.8)
INTEGRAL_X = (0.25, 0.5, 1.0)
CAPUTO_ALPHAS = (0.25, 0.5, 0.75, 1.0)

DEFAULT_CASES = {
    "qcomb": 100, "gamma": 3, "derivative": 20, "bounds": 100, "integral": 0,
    "relations": 20, "fractional": 20, "matrix": 20, "oracle": 0,
}


def _mixed(name, value, ref, tol, note=""):
    err = abs(value - ref) / (1.0 + abs(ref))
    if math.isnan(err):
        err = math.inf
    return IdentityReport(name, value, ref, abs(value - ref), err, err <= tol, note)


# -- q-combinatorics ----------------------------------------------------------------

def qbinom_scaled_error(a: float, b: float, q: float, n: int) -> tuple[float, float, float]:
    """(product, expansion, |difference| / sum of |expansion terms|).

    The sum of absolute terms is prod_{j<n}(|a| + |b| q^j). It equals |product|
    for same-sign a, b, where the scaled error is the relative error; with
    mixed signs the expansion cancels and only the scaled error is meaningful.
    """
    lhs = qcomb.rising_q_product(a, b, q, n)
    rhs = qcomb.qbinom_expand(a, b, q, n)
    size = qcomb.rising_q_product(abs(a), abs(b), q, n)
    return lhs, rhs, abs(lhs - rhs) / size if size > 0 else 0.0


def pascal_errors(n: int, q: float) -> tuple[float, float]:
    """Worst Pascal-rule error over 1 <= r <= n, absolute and in units of max(1, [n,r])."""
    worst_abs = worst_scaled = 0.0
    for r in range(1, n + 1):
        v = qcomb.gauss_binom(n, r, q)
        d = abs(v - q**r * qcomb.gauss_binom(n - 1, r, q) - qcomb.gauss_binom(n - 1, r - 1, q))
        worst_abs = max(worst_abs, d)
        worst_scaled = max(worst_scaled, d / max(1.0, v))
    return worst_abs, worst_scaled


def qcomb_suite(rng: np.random.Generator, cases: int) -> list[IdentityReport]:
    """Tolerances are in units of the size of the quantities involved.

    Gaussian binomials reach 1.5e8 at n = 30 as q -> 1, and the q-binomial
    expansion cancels for mixed-sign a, b, so fixed absolute or relative
    thresholds would only measure floating-point spacing.
    """
    out = []
    for _ in range(cases):
        a, b = (float(v) for v in rng.uniform(-2.0, 2.0, 2))
        q = float(rng.uniform(1e-9, 1.0))
        n = int(rng.integers(0, 31))
        lhs, rhs, err = qbinom_scaled_error(a, b, q, n)
        out.append(IdentityReport("q-binomial theorem (error / sum |terms|)", lhs, rhs, abs(lhs - rhs), err,
                                  err <= 1e-12, f"a={a!r}, b={b!r}, q={q!r}, n={n}"))
        m = max(n, 1)
        pa, ps = pascal_errors(m, q)
        out.append(IdentityReport("Pascal rule [n,r] = q^r [n-1,r] + [n-1,r-1] (error / max(1, [n,r]))",
                                  0.0, pa, pa, ps, ps <= 1e-13, f"n={m}, q={q!r}"))
        sym = max(abs(qcomb.gauss_binom(m, r, q) - qcomb.gauss_binom(m, m - r, q))
                  / max(1.0, qcomb.gauss_binom(m, r, q)) for r in range(m + 1))
        out.append(IdentityReport("symmetry [n,r] = [n,n-r] (error / max(1, [n,r]))", 0.0, sym, sym, sym,
                                  sym <= 1e-13, f"n={m}, q={q!r}"))
        edge = (qcomb.gauss_binom(m, -1, q), qcomb.gauss_binom(m, m + 1, q))
        out.append(IdentityReport("[n,r] = 0 outside 0 <= r <= n", 0.0, max(map(abs, edge)),
                                  max(map(abs, edge)), 0.0, edge == (0.0, 0.0), f"n={m}, q={q!r}"))
    return out


# -- incomplete gamma identities --------------------------------------------------

def gamma_suite(rng: np.random.Generator, cases: int) -> list[IdentityReport]:
    out = []
    for x in GAMMA_POINTS:
        for rep in special.verify_gamma_identities(x, 20):
            out.append(IdentityReport(rep.name, rep.lhs, rep.rhs, rep.abs_err, rep.rel_err, rep.passed,
                                      f"x={x!r}; {rep.note}"))
    for _ in range(cases):
        x = float(np.exp(rng.uniform(math.log(0.05), math.log(20.0))))
        for rep in special.verify_gamma_identities(x, 10):
            out.append(IdentityReport(rep.name, rep.lhs, rep.rhs, rep.abs_err, rep.rel_err, rep.passed,
                                      f"x={x!r}; {rep.note}"))
    return out


# -- derivatives ----------------------------------------------------------------------

FD_OFFSETS = np.arange(-3, 4)
FD_STEP = {1: 1e-3, 2: 5e-3, 3: 1e-2, 4: 2e-2}


def fd_weights(m: int) -> np.ndarray:
    """Seven-point central-difference weights for the m-th derivative (step 1)."""
    k = FD_OFFSETS.astype(float)
    V = np.vander(k, increasing=True).T
    rhs = np.zeros(len(k))
    rhs[m] = math.factorial(m)
    return np.linalg.solve(V, rhs)


def fd_derivative(f, x: float, m: int, h: float | None = None) -> float:
    h = FD_STEP[m] if h is None else h
    w = fd_weights(m)
    return math.fsum(wi * f(x + k * h) for wi, k in zip(w, FD_OFFSETS)) / h**m


def derivative_suite(rng: np.random.Generator, cases: int) -> list[IdentityReport]:
    out = []
    for _ in range(cases):
        a, b = (float(v) for v in rng.uniform(-1.5, 1.5, 2))
        q = float(rng.uniform(0.1, 0.9))
        x = float(rng.uniform(0.1, 2.0))
        p = ScalarParams(a, b, q)
        tag = f"a={a!r}, b={b!r}, q={q!r}, x={x!r}"
        R = lambda t: core.eval_r(p, t).value  # noqa: E731
        h = 1e-5
        for m in range(0, 4):
            qm = q**m
            fd = (R(qm * (x + h)) - R(qm * (x - h))) / (2 * h)
            out.append(_mixed("d/dx R(q^m x) vs central difference", core.derivative_shifted(p, x, m).value,
                              fd, 1e-6, f"{tag}, m={m}"))
        for m in range(1, 5):
            out.append(_mixed("m-th derivative formula vs finite differences", core.derivative_r(p, x, m).value,
                              fd_derivative(R, x, m), 1e-4, f"{tag}, m={m}"))
        d1 = core.derivative_r(p, x, 1).value
        out.append(compare("first derivative = a R(x) + b R(qx)", d1, a * R(x) + b * R(q * x),
                           atol=1e-12, rtol=1e-12, note=tag))
    return out


# -- exponential bounds -------------------------------------------------------------

def bounds_suite(rng: np.random.Generator, cases: int) -> list[IdentityReport]:
    out = []
    for _ in range(cases):
        a, b = (float(v) for v in rng.uniform(0.0, 2.0, 2))
        q = float(rng.uniform(0.01, 0.99))
        x = float(rng.uniform(0.0, 5.0))
        rep = core.bounds_check(ScalarParams(a, b, q), x)
        out.append(IdentityReport(rep.name, rep.lhs, rep.rhs, rep.abs_err, rep.rel_err, rep.passed,
                                  f"a={a!r}, b={b!r}, q={q!r}, x={x!r}; {rep.note}"))
    return out


# -- integral representations -------------------------------------------------------

def integral_suite(rng: np.random.Generator, cases: int) -> list[IdentityReport]:
    """Fixed grid inside the convergence regime; ``cases`` adds random grid points."""
    points = [(a, b, q, x) for a, b in INTEGRAL_AB for q in INTEGRAL_Q for x in INTEGRAL_X]
    for _ in range(cases):
        i = int(rng.integers(len(INTEGRAL_AB)))
        points.append((*INTEGRAL_AB[i], float(rng.uniform(0.2, 0.9)), float(rng.uniform(0.2, 1.0))))
    out = []
    for a, b, q, x in points:
        out.extend(identities.verify_integral_identities(ScalarParams(a, b, q), x))
    return out


# -- parameter relations ---------------------------------------------------------

def relations_suite(rng: np.random.Generator, cases: int) -> list[IdentityReport]:
    out = []
    for _ in range(cases):
        a, b = (float(v) for v in rng.uniform(0.5, 1.5, 2))
        l, m = (int(v) for v in rng.integers(1, 3, 2))
        q = float(rng.uniform(0.1, 0.9))
        x = float(rng.uniform(0.0, 1.5))
        for rel in core.scaling_relations(a, b, l, m):
            rep = core.check_relation(rel, q, x)
            out.append(IdentityReport(rel.name.split(":")[0], rep.lhs, rep.rhs, rep.abs_err, rep.rel_err,
                                      rep.passed, f"{rel.name}; a={a!r}, b={b!r}, l={l}, m={m}, {rep.note}"))
    for _ in range(cases):
        while True:
            a, b = (float(v) for v in rng.uniform(-2.0, 2.0, 2))
            if min(abs(a), abs(a - 1.0), abs(a + 1.0)) > 0.05:
                break
        q = float(rng.uniform(0.1, 0.9))
        x = float(rng.uniform(0.0, 1.5))
        for rel in core.contiguous_relations(a, b):
            rep = core.check_relation(rel, q, x)
            out.append(IdentityReport(rel.name.split(":")[0], rep.lhs, rep.rhs, rep.abs_err, rep.rel_err,
                                      rep.passed, f"{rel.name}; a={a!r}, b={b!r}, {rep.note}"))
    for _ in range(cases):
        a, b = (float(v) for v in rng.uniform(-2.0, 2.0, 2))
        q = float(rng.uniform(0.1, 0.9))
        x = float(rng.uniform(0.0, 1.0))
        out.extend(core.check_beta_forms(ScalarParams(a, b, q), x))
    return out


# -- fractional order -------------------------------------------------------------

def mittag_leffler_half(z: float) -> float:
    """E_(1/2)(z) = e^(z^2) erfc(-z)."""
    return math.exp(z * z) * math.erfc(-z)


def fractional_suite(rng: np.random.Generator, cases: int) -> list[IdentityReport]:
    out = []
    for _ in range(cases):
        a, b = (float(v) for v in rng.uniform(-1.0, 1.0, 2))
        q = float(rng.uniform(0.1, 0.9))
        x = float(rng.uniform(0.0, 2.0))
        p = ScalarParams(a, b, q)
        tag = f"a={a!r}, b={b!r}, q={q!r}, x={x!r}"
        out.append(compare("alpha = 1 matches the integer-order series",
                           fractional.eval_r_alpha(fractional.FractionalParams(p, 1.0), x).value,
                           core.eval_r(p, x).value, atol=0.0, rtol=1e-12, note=tag))
        for alpha in CAPUTO_ALPHAS:
            rep = fractional.caputo_recurrence_check(fractional.FractionalParams(p, alpha), 50)
            out.append(IdentityReport("Caputo term recurrence", rep.lhs, rep.rhs, rep.abs_err, rep.rel_err,
                                      rep.passed, f"{tag}, alpha={alpha!r}, {rep.note}"))
        ab, bb = (float(v) for v in rng.uniform(0.5, 1.5, 2))
        l, m = (int(v) for v in rng.integers(1, 3, 2))
        alpha = float(rng.uniform(0.2, 1.0))
        xs = float(rng.uniform(0.0, 1.5))
        for rel in fractional.fractional_scaling_relations(ab, bb, l, m, alpha):
            rep = fractional.check_fractional_relation(rel, q, alpha, xs)
            out.append(IdentityReport(rel.name.split(":")[0], rep.lhs, rep.rhs, rep.abs_err, rep.rel_err,
                                      rep.passed, f"{rel.name}; a={ab!r}, b={bb!r}, l={l}, m={m}, {rep.note}"))
    for z in (0.5, 1.0, 1.5):
        v = fractional.eval_r_alpha(fractional.FractionalParams(ScalarParams(1.0, 0.0, 0.5), 0.5), z * z).value
        out.append(compare("E_1/2(z) = e^(z^2) erfc(-z)", v, mittag_leffler_half(z), atol=0.0, rtol=1e-12,
                           note=f"z={z!r}"))
    return out


# -- matrix systems -----------------------------------------------------------------

def _random_matrix(rng, d, scale):
    return rng.uniform(-scale, scale, (d, d))


def qbinom_lift_error(A, B, q: float, n: int) -> float:
    """|ordered product - q-binomial expansion| over the summed norms of the expansion terms."""
    P = matrix.ordered_product(A, B, q, n)
    E = matrix.qbinom_matrix_expand(A, B, q, n)
    size = sum(q ** qcomb.binom2(r) * qcomb.gauss_binom(n, r, q)
               * np.linalg.norm(np.linalg.matrix_power(A, n - r) @ np.linalg.matrix_power(B, r))
               for r in range(n + 1))
    return float(np.linalg.norm(P - E)) / size if size > 0 else 0.0


def matrix_suite(rng: np.random.Generator, cases: int) -> list[IdentityReport]:
    out = []
    for _ in range(cases):
        d = int(rng.integers(2, 5))
        q = float(rng.uniform(0.1, 0.9))
        x = float(rng.uniform(0.0, 2.0))
        a = rng.uniform(-1.5, 1.5, d)
        b = rng.uniform(-1.5, 1.5, d)
        y0 = rng.uniform(-1.0, 1.0, d)
        tag = f"d={d}, q={q!r}, x={x!r}"

        # diagonal systems decouple into scalar series
        val = matrix.eval_r_matrix(matrix.MatrixParams(np.diag(a), np.diag(b), y0, q), x).value
        ref = np.array([core.eval_r(ScalarParams(float(ai), float(bi), q), x).value for ai, bi in zip(a, b)]) * y0
        err = float(np.linalg.norm(val - ref) / np.linalg.norm(ref))
        out.append(IdentityReport("diagonal system = scalar series per component (normwise)",
                                  float(np.linalg.norm(val)), float(np.linalg.norm(ref)),
                                  float(np.linalg.norm(val - ref)), err, err <= 1e-12, tag))

        # strictly upper triangular A with B = 0: the series stops after d terms
        N = np.triu(rng.uniform(-1.0, 1.0, (d, d)), 1)
        val = matrix.eval_r_matrix(matrix.MatrixParams(N, np.zeros((d, d)), y0, q), x).value
        exact = y0.copy()
        term = y0.copy()
        for n in range(1, d):
            term = N @ term * (x / n)
            exact = exact + term
        err = float(np.max(np.abs(val - exact)))
        out.append(IdentityReport("nilpotent A, B = 0: finite sum", float(np.linalg.norm(val)),
                                  float(np.linalg.norm(exact)), err, err, err <= 1e-14, tag))

        # B a polynomial in A commutes with A, so the q-binomial expansion lifts
        A = _random_matrix(rng, d, 1.0)
        c = rng.uniform(-1.0, 1.0, 3)
        B = c[0] * np.eye(d) + c[1] * A + c[2] * A @ A
        worst_rel = max(qbinom_lift_error(A, B, q, n) for n in range(11))
        out.append(IdentityReport("commuting A, B: ordered product = q-binomial expansion (error / sum |terms|)",
                                  0.0, worst_rel, worst_rel, worst_rel, worst_rel <= 1e-11, f"{tag}, n<=10"))

        # contiguous relations on well-conditioned random systems
        # diagonal dominance keeps A, A - I and A + I well conditioned
        mp = matrix.MatrixParams(_random_matrix(rng, d, 0.3) + 2.5 * np.eye(d), _random_matrix(rng, d, 0.8),
                                 y0, q)
        for variant in ("A", "B", "both"):
            for sign in (1, -1):
                try:
                    form = matrix.contiguous_matrix(mp, variant, sign)
                except qcomb.DomainError:
                    continue
                rep = matrix.check_contiguous(form, x)
                out.append(IdentityReport(f"matrix contiguous relation ({variant})", rep.lhs, rep.rhs,
                                          rep.abs_err, rep.rel_err, rep.passed,
                                          f"{form.description}; {tag}"))
    return out


# -- independent ODE oracle ---------------------------------------------------------

ORACLE_MATRIX = matrix.MatrixParams([[-0.5, 0.3], [0.2, -0.1]], [[0.1, -0.4], [0.3, 0.2]], [1.0, -0.5], 0.6)


def oracle_suite(rng: np.random.Generator, cases: int) -> list[IdentityReport]:
    out = []
    for a, b, q in STANDARD_SUITE:
        p = ScalarParams(a, b, q)
        sol = dde.solve_pantograph(p, 5.0, 1e-3)
        grid = sol.nodes[::50]
        diff = [abs(core.eval_r(p, float(t)).value - sol.values[i * 50, 0]) for i, t in enumerate(grid)]
        mid = [abs(core.eval_r(p, float(t)).value - dde.interpolate(sol, float(t)))
               for t in np.linspace(0.0123, 4.987, 97)]
        e = max(max(diff), max(mid))
        out.append(IdentityReport("series vs RK4 oracle on [0,5]", 0.0, e, e, e, e <= 1e-6,
                                  f"a={a!r}, b={b!r}, q={q!r}, dt=1e-3"))
    errs = []
    for dt in (1e-3, 5e-4):
        sol = dde.solve_pantograph(ScalarParams(5.0, 0.0, 0.5), 2.0, dt)
        errs.append(float(np.max(np.abs(sol.values[:, 0] - np.exp(5.0 * sol.nodes)) / np.exp(5.0 * sol.nodes))))
    ratio = errs[0] / errs[1]
    out.append(IdentityReport("RK4 oracle order: error ratio when dt halves", errs[0], errs[1],
                              ratio, ratio, ratio >= 12.0, f"a=5, b=0, x in [0,2], ratio={ratio!r}"))
    sol = dde.solve_pantograph(ORACLE_MATRIX, 3.0, 1e-3)
    e = 0.0
    for t in np.linspace(0.0, 3.0, 61):
        v = matrix.eval_r_matrix(ORACLE_MATRIX, float(t)).value
        e = max(e, float(np.max(np.abs(v - dde.interpolate(sol, float(t))))))
    out.append(IdentityReport("2x2 matrix series vs RK4 oracle on [0,3]", 0.0, e, e, e, e <= 1e-6, "dt=1e-3"))
    return out


SUITES = {
    "qcomb": qcomb_suite,
    "gamma": gamma_suite,
    "derivative": derivative_suite,
    "bounds": bounds_suite,
    "integral": integral_suite,
    "relations": relations_suite,
    "fractional": fractional_suite,
    "matrix": matrix_suite,
    "oracle": oracle_suite,
}


def run_suite(name: str, seed: int, cases: int | None = None) -> list[IdentityReport]:
    """Run one suite with its own generator, seeded by (seed, suite index)."""
    idx = list(SUITES).index(name)
    rng = np.random.default_rng([seed, idx])
    n = DEFAULT_CASES[name] if cases is None else cases
    return SUITES[name](rng, n)
