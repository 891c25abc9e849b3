"""Command line: evaluate, tabulate, solve, and run the verification suites.

Exit codes: 0 success, 1 verification failure, 2 usage or domain error,
3 nonconvergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import suites
from .core import EvalControl, ScalarParams, Status, eval_r
from .dde import NonContractionError, solve_pantograph
from .fractional import FractionalParams, eval_r_alpha
from .matrix import MatrixParams, eval_r_matrix
from .qcomb import DomainError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2, 3
SUITE_NAMES = (*suites.SUITES, "all")


class UsageError(Exception):
    pass


# -- argument types -------------------------------------------------------------------

def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return v


def _q(text: str) -> float:
    v = _finite(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("q must lie in (0,1)")
    return v


def _tol(text: str) -> float:
    v = _finite(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("tol must lie in (0,1)")
    return v


def _positive(text: str) -> float:
    v = _finite(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _alpha(text: str) -> float:
    v = _finite(text)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError("alpha must lie in (0,1]")
    return v


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be at least {lo}")
        return v
    return parse


def _common(default_format: str = "csv") -> argparse.ArgumentParser:
    # a fresh parent per subcommand: argparse shares parent actions, defaults included
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default=default_format)
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pantograph",
                                     description="Series solution of y'(x) = a y(x) + b y(qx), y(0) = 1.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[_common()], help="evaluate R(a, b, q, x)")
    p.add_argument("--a", type=_finite, required=True)
    p.add_argument("--b", type=_finite, required=True)
    p.add_argument("--q", type=_q, required=True)
    p.add_argument("--x", type=_finite, required=True)
    p.add_argument("--alpha", type=_alpha, help="fractional order in (0,1]; needs x >= 0")
    p.add_argument("--tol", type=_tol, default=1e-14, help="relative truncation tolerance")

    p = sub.add_parser("table", parents=[_common()], help="tabulate R on a uniform grid")
    p.add_argument("--a", type=_finite, required=True)
    p.add_argument("--b", type=_finite, required=True)
    p.add_argument("--q", type=_q, required=True)
    p.add_argument("--x-start", type=_finite, required=True)
    p.add_argument("--x-end", type=_finite, required=True)
    p.add_argument("--steps", type=_int_at_least(2), required=True, help="number of rows")
    p.add_argument("--tol", type=_tol, default=1e-14)

    p = sub.add_parser("verify", parents=[_common("json")], help="run a verification suite")
    p.add_argument("--suite", choices=SUITE_NAMES, required=True)
    p.add_argument("--cases", type=_int_at_least(0), help="random cases per suite (suite default if omitted)")
    p.add_argument("--seed", type=_int_at_least(0), default=0)

    p = sub.add_parser("solve", parents=[_common()], help="integrate the equation with the RK4 oracle")
    p.add_argument("--a", type=_finite, required=True)
    p.add_argument("--b", type=_finite, required=True)
    p.add_argument("--q", type=_q, required=True)
    p.add_argument("--x-max", type=_positive, required=True)
    p.add_argument("--dt", type=_positive, default=1e-3)

    p = sub.add_parser("matrix-eval", parents=[_common()], help="evaluate the matrix series from a JSON file")
    p.add_argument("--file", required=True, help='JSON {"A": [[...]], "B": [[...]], "y0": [...], "q": r}')
    p.add_argument("--x", type=_finite, required=True)
    p.add_argument("--tol", type=_tol, default=1e-14)
    return parser


# -- output -----------------------------------------------------------------------------

def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj, indent=None) -> str:
    return json.dumps(obj, sort_keys=True, indent=indent, allow_nan=False) + "\n"


def _num(v: float):
    """Floats for JSON; non-finite values become strings."""
    v = float(v)
    return v if math.isfinite(v) else str(v)


def _exit_for(status: Status) -> int:
    return EXIT_OK if status is Status.CONVERGED else EXIT_NONCONVERGED


# -- commands ---------------------------------------------------------------------------

def cmd_eval(args) -> tuple[str, int]:
    control = EvalControl(rel_tol=args.tol)
    params = ScalarParams(args.a, args.b, args.q)
    if args.alpha is not None:
        res = eval_r_alpha(FractionalParams(params, args.alpha), args.x, control)
    else:
        res = eval_r(params, args.x, control)
    record = {"value": res.value, "terms_used": res.terms_used, "tail_bound": res.tail_bound,
              "status": res.status.value}
    if args.format == "json":
        text = _json({k: _num(v) if isinstance(v, float) else v for k, v in record.items()})
    else:
        text = _csv(list(record), [[repr(res.value), res.terms_used, repr(res.tail_bound), res.status.value]])
    return text, _exit_for(res.status)


def cmd_table(args) -> tuple[str, int]:
    if not args.x_start < args.x_end:
        raise UsageError("x-start must be below x-end")
    control = EvalControl(rel_tol=args.tol)
    params = ScalarParams(args.a, args.b, args.q)
    with_bounds = args.a >= 0 and args.b >= 0 and args.x_start >= 0
    rows = []
    status = Status.CONVERGED
    for x in np.linspace(args.x_start, args.x_end, args.steps):
        x = float(x)
        res = eval_r(params, x, control)
        if not res.converged:
            status = res.status
        row = {"x": x, "value": res.value, "terms": res.terms_used}
        if with_bounds:
            row["lower"] = math.exp(args.a * x)
            row["upper"] = math.exp((args.a + args.b) * x)
        rows.append(row)
    header = ["x", "value", "terms", "lower", "upper"] if with_bounds else ["x", "value", "terms"]
    if args.format == "json":
        text = _json([{k: _num(v) if isinstance(v, float) else v for k, v in r.items()} for r in rows])
    else:
        text = _csv(header, [[repr(r[k]) if isinstance(r[k], float) else r[k] for k in header] for r in rows])
    return text, _exit_for(status)


def cmd_solve(args) -> tuple[str, int]:
    if args.dt > args.x_max / 10.0:
        raise UsageError("dt must be at most x-max/10")
    sol = solve_pantograph(ScalarParams(args.a, args.b, args.q), args.x_max, args.dt)
    xs = [float(v) for v in sol.nodes]
    ys = [float(v) for v in sol.values[:, 0]]
    if args.format == "json":
        text = _json([{"x": _num(x), "y": _num(y)} for x, y in zip(xs, ys)])
    else:
        text = _csv(["x", "y"], [[repr(x), repr(y)] for x, y in zip(xs, ys)])
    ok = all(math.isfinite(y) for y in ys)
    return text, EXIT_OK if ok else EXIT_NONCONVERGED


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def load_matrix_file(path: str) -> MatrixParams:
    """Read and validate {"A": [[...]], "B": [[...]], "y0": [...], "q": r}."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("matrix file must hold a JSON object")
    missing = [k for k in ("A", "B", "y0", "q") if k not in doc]
    if missing:
        raise UsageError(f"matrix file is missing {', '.join(missing)}")
    for key in ("A", "B"):
        rows = doc[key]
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise UsageError(f"{key} must be a nonempty list of rows")
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise UsageError(f"{key} has rows of different lengths {sorted(widths)}")
        if widths != {len(rows)}:
            raise UsageError(f"{key} must be square, got {len(rows)}x{widths.pop()}")
        if not all(_is_number(v) for r in rows for v in r):
            raise UsageError(f"{key} entries must be numbers")
    y0 = doc["y0"]
    if not isinstance(y0, list) or not all(_is_number(v) for v in y0):
        raise UsageError("y0 must be a list of numbers")
    if not _is_number(doc["q"]):
        raise UsageError("q must be a number")
    return MatrixParams(doc["A"], doc["B"], y0, doc["q"])


def cmd_matrix_eval(args) -> tuple[str, int]:
    mparams = load_matrix_file(args.file)
    res = eval_r_matrix(mparams, args.x, EvalControl(rel_tol=args.tol))
    values = [float(v) for v in res.value]
    if args.format == "json":
        text = _json({"value": [_num(v) for v in values], "terms_used": res.terms_used,
                      "tail_bound": _num(res.tail_bound), "status": res.status.value})
    else:
        text = _csv(["component", "value", "terms_used", "tail_bound", "status"],
                    [[i, repr(v), res.terms_used, repr(res.tail_bound), res.status.value]
                     for i, v in enumerate(values)])
    return text, _exit_for(res.status)


def run_verify(suite: str, seed: int, cases: int | None) -> dict:
    """Aggregate the reports of one suite (or all) into a JSON-ready document."""
    names = list(suites.SUITES) if suite == "all" else [suite]
    summary = []
    failures = []
    for name in names:
        groups: dict[str, list] = {}
        for rep in suites.run_suite(name, seed, cases):
            groups.setdefault(rep.name, []).append(rep)
        for label, reps in groups.items():
            bad = [r for r in reps if not r.passed]
            pick = bad[0] if bad else max(reps, key=lambda r: min(r.rel_err, r.abs_err))
            summary.append({"suite": name, "name": label, "count": len(reps), "failures": len(bad),
                            "pass": not bad, "worst": pick.to_dict()})
            failures.extend({"suite": name, **r.to_dict()} for r in bad)
    return {"suite": suite, "seed": seed, "cases": cases, "pass": not failures,
            "checks": sum(s["count"] for s in summary), "failed": len(failures),
            "summary": summary, "failures": failures}


def cmd_verify(args) -> tuple[str, int]:
    doc = run_verify(args.suite, args.seed, args.cases)
    if args.format == "json":
        text = _json(doc, indent=2)
    else:
        text = _csv(["suite", "name", "count", "failures", "worst_abs_err", "worst_rel_err", "pass"],
                    [[s["suite"], s["name"], s["count"], s["failures"], s["worst"]["abs_err"],
                      s["worst"]["rel_err"], s["pass"]] for s in doc["summary"]])
    return text, EXIT_OK if doc["pass"] else EXIT_FAIL


COMMANDS = {"eval": cmd_eval, "table": cmd_table, "verify": cmd_verify, "solve": cmd_solve,
            "matrix-eval": cmd_matrix_eval}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text, code = COMMANDS[args.command](args)
    except (UsageError, DomainError) as exc:
        print(f"pantograph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonContractionError, OverflowError) as exc:
        print(f"pantograph: nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
