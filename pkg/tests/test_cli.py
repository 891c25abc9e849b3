import csv
import io
import json
import math
import subprocess
import sys

import pytest

from pantograph import cli, suites
from pantograph.core import eval_r
from pantograph.reports import IdentityReport


def run(capsys, *argv):
    try:
        code = cli.main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_eval_examples(capsys):
    code, out, _ = run(capsys, "eval", "--a", "1", "--b", "0", "--q", "0.5", "--x", "2")
    assert code == 0
    (row,) = rows(out)
    assert list(row) == ["value", "terms_used", "tail_bound", "status"]
    assert float(row["value"]) == pytest.approx(math.exp(2), rel=1e-14) and row["status"] == "converged"
    code, out, _ = run(capsys, "eval", "--a", "1", "--b", "1", "--q", "0.5", "--x", "1", "--format", "json")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(5.3456182712877400998, rel=1e-13)


def test_eval_fractional(capsys):
    code, out, _ = run(capsys, "eval", "--a", "1", "--b", "0", "--q", "0.5", "--x", "1", "--alpha", "0.5")
    assert code == 0 and float(rows(out)[0]["value"]) == pytest.approx(5.0089800807622834663, rel=1e-12)
    code, _, _ = run(capsys, "eval", "--a", "1", "--b", "0", "--q", "0.5", "--x", "-1", "--alpha", "0.5")
    assert code == 2


@pytest.mark.parametrize("argv,msg", [
    (["eval", "--a", "1", "--b", "1", "--q", "1.2", "--x", "1"], "q must lie in (0,1)"),
    (["eval", "--a", "1", "--b", "1", "--q", "0.5", "--x", "nan"], ""),
    (["eval", "--a", "1", "--b", "1", "--q", "0.5", "--x", "1", "--tol", "0"], ""),
    (["eval", "--a", "1", "--b", "1", "--q", "0.5", "--x", "1", "--alpha", "1.5"], ""),
    (["verify", "--suite", "bogus"], ""),
    (["table", "--a", "1", "--b", "1", "--q", "0.5", "--x-start", "1", "--x-end", "0", "--steps", "3"], ""),
    (["table", "--a", "1", "--b", "1", "--q", "0.5", "--x-start", "0", "--x-end", "1", "--steps", "1"], ""),
    (["solve", "--a", "1", "--b", "1", "--q", "0.5", "--x-max", "1", "--dt", "0.5"], ""),
    (["solve", "--a", "1", "--b", "1", "--q", "0.5", "--x-max", "-1"], ""),
])
def test_usage_errors_exit_2(capsys, argv, msg):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert msg in err


def test_nonconvergence_exit_3(capsys):
    code, out, _ = run(capsys, "eval", "--a", "1", "--b", "1", "--q", "0.5", "--x", "1000")
    assert code == 3 and rows(out)[0]["status"] == "overflow"
    code, _, err = run(capsys, "solve", "--a", "0", "--b", "1e5", "--q", "0.9", "--x-max", "1", "--dt", "0.1")
    assert code == 3 and "nonconvergence" in err


def test_table_examples(capsys):
    code, out, _ = run(capsys, "table", "--a", "0", "--b", "0", "--q", "0.5", "--x-start", "0", "--x-end", "2",
                       "--steps", "5")
    assert code == 0 and all(float(r["value"]) == 1.0 for r in rows(out))
    code, out, _ = run(capsys, "table", "--a", "1", "--b", "1", "--q", "0.5", "--x-start", "0", "--x-end", "1",
                       "--steps", "11")
    assert out.splitlines()[0] == "x,value,terms,lower,upper"
    last = rows(out)[-1]
    assert float(last["x"]) == 1.0 and float(last["value"]) == pytest.approx(5.345618, abs=1e-6)
    assert float(last["lower"]) <= float(last["value"]) <= float(last["upper"])
    code, out, _ = run(capsys, "table", "--a", "1", "--b", "-1", "--q", "0.5", "--x-start", "0", "--x-end", "1",
                       "--steps", "3")
    assert code == 0 and out.splitlines()[0] == "x,value,terms"


def test_solve_round_trip(capsys):
    code, out, _ = run(capsys, "solve", "--a", "1", "--b", "0", "--q", "0.5", "--x-max", "1")
    assert code == 0 and float(rows(out)[-1]["y"]) == pytest.approx(math.e, abs=1e-10)
    for params in suites.STANDARD_SUITE:
        a, b, q = (str(v) for v in params)
        code, out, _ = run(capsys, "solve", "--a", a, "--b", b, "--q", q, "--x-max", "5", "--format", "json")
        pts = json.loads(out)
        for pt in pts[::250]:
            assert abs(pt["y"] - eval_r(params, pt["x"]).value) <= 1e-6


def write(tmp_path, doc, name="m.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


def test_matrix_eval_diagonal_matches_eval(capsys, tmp_path):
    path = write(tmp_path, {"A": [[1, 0], [0, 0.3]], "B": [[1, 0], [0, 0.4]], "y0": [1, 1], "q": 0.5})
    code, out, _ = run(capsys, "matrix-eval", "--file", path, "--x", "1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    for v, (a, b) in zip(doc["value"], [(1, 1), (0.3, 0.4)]):
        _, single, _ = run(capsys, "eval", "--a", str(a), "--b", str(b), "--q", "0.5", "--x", "1", "--format", "json")
        assert v == pytest.approx(json.loads(single)["value"], rel=1e-12)
    code, out, _ = run(capsys, "matrix-eval", "--file", path, "--x", "1")
    assert [r["component"] for r in rows(out)] == ["0", "1"]


@pytest.mark.parametrize("doc", [
    {"A": [[1, 0], [0]], "B": [[1, 0], [0, 1]], "y0": [1, 1], "q": 0.5},
    {"A": [[1, 0]], "B": [[1, 0]], "y0": [1], "q": 0.5},
    {"A": [[1, 0], [0, 1]], "B": [[1]], "y0": [1, 1], "q": 0.5},
    {"A": [[1, 0], [0, 1]], "B": [[1, 0], [0, 1]], "y0": [1], "q": 0.5},
    {"A": [[1, 0], [0, 1]], "B": [[1, 0], [0, 1]], "y0": [1, 1], "q": 1.5},
    {"A": [["x", 0], [0, 1]], "B": [[1, 0], [0, 1]], "y0": [1, 1], "q": 0.5},
    {"A": [[1, 0], [0, 1]], "B": [[1, 0], [0, 1]], "y0": [1, 1]},
    [1, 2, 3],
    "{not json",
])
def test_matrix_eval_malformed_exit_2(capsys, tmp_path, doc):
    code, out, err = run(capsys, "matrix-eval", "--file", write(tmp_path, doc), "--x", "1")
    assert code == 2 and out == "" and err


def test_matrix_eval_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "matrix-eval", "--file", str(tmp_path / "nope.json"), "--x", "1")
    assert code == 2


def test_verify_qcomb_seed_7(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "qcomb", "--cases", "100", "--seed", "7")
    doc = json.loads(out)
    assert code == 0 and doc["pass"] and doc["failed"] == 0 and doc["checks"] > 0


@pytest.mark.parametrize("suite", ["gamma", "bounds", "integral", "relations", "fractional", "matrix"])
def test_verify_suites_pass(capsys, suite):
    code, out, _ = run(capsys, "verify", "--suite", suite, "--seed", "3")
    assert code == 0 and json.loads(out)["pass"]


def test_verify_deterministic(capsys, tmp_path):
    outs = []
    for k in range(2):
        path = str(tmp_path / f"r{k}.json")
        code, _, _ = run(capsys, "verify", "--suite", "relations", "--seed", "5", "-o", path)
        assert code == 0
        outs.append(open(path, "rb").read())
    assert outs[0] == outs[1]
    _, csv_out, _ = run(capsys, "verify", "--suite", "relations", "--seed", "5", "--format", "csv")
    assert csv_out.splitlines()[0] == "suite,name,count,failures,worst_abs_err,worst_rel_err,pass"


def test_verify_failure_exit_1(capsys, monkeypatch):
    bad = IdentityReport("planted", 1.0, 2.0, 1.0, 0.5, False, "n=3")
    monkeypatch.setitem(suites.SUITES, "qcomb", lambda rng, cases: [bad])
    code, out, _ = run(capsys, "verify", "--suite", "qcomb")
    doc = json.loads(out)
    assert code == 1 and not doc["pass"]
    assert doc["failures"][0]["name"] == "planted" and doc["failures"][0]["note"] == "n=3"


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "pantograph.cli", "eval", "--a", "1", "--b", "1", "--q", "0.5",
                          "--x", "1"], capture_output=True, text=True, check=True).stdout
    assert float(rows(out)[0]["value"]) == pytest.approx(5.345618, abs=1e-6)
