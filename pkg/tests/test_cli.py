import json

import pytest

from engines.hypersum_eval.core_eval import closed_value
from engines.verify import core_verify
from engines.bench import core_bench
from engines.hypersum_eval.core_eval import f_dispatch
from shared.models import EvalMethod

from cli import main_handler
from cli.main_handler import EXIT_EXTERNAL_DATA, EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(["--quiet", *argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- eval ---

def test_eval_all_methods_reach_consensus(capsys):
    code, out, _ = run(capsys, "--format", "json", "eval", "--n", "5", "--m", "1", "--k", "1", "--method", "all")
    document = json.loads(out)
    assert code == EXIT_OK
    assert [row["method"] for row in document["results"]] == [m.value for m in EvalMethod]
    assert {row["value"] for row in document["results"]} == {"15"}
    assert document["consensus"] is True


def test_eval_text_output(capsys):
    code, out, _ = run(capsys, "eval", "--n", "0", "--m", "3", "--k", "2")
    assert code == EXIT_OK
    assert "consensus: true" in out
    assert all(line.split()[-1] == "0" for line in out.splitlines()[1:-1])


def test_eval_single_method(capsys):
    code, out, _ = run(capsys, "eval", "--n", "3", "--m", "2", "--k", "2", "--method", "theorem", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["results"] == [{"method": "theorem", "value": "20"}]


def test_eval_csv_has_consensus_column(capsys):
    code, out, _ = run(capsys, "--format", "csv", "eval", "--n", "3", "--m", "3", "--k", "1", "--method", "closed")
    assert code == EXIT_OK
    assert out.splitlines() == ["method,value,consensus", "closed,36,true"]


@pytest.mark.parametrize("argv", [
    ["eval", "--n", "3", "--m", "1", "--k", "0"],
    ["eval", "--n", "-1", "--m", "1", "--k", "1"],
    ["eval", "--n", "3", "--m", "1", "--k", "1", "--method", "magic"],
    ["eval", "--n", "three", "--m", "1", "--k", "1"],
])
def test_eval_usage_errors(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_USAGE
    assert out == ""


def _skew_theorem(q, method, session=None):
    value = f_dispatch(q, method, session)
    return value + 1 if EvalMethod(method) is EvalMethod.THEOREM else value


def test_eval_disagreement_fails(capsys, caplog, monkeypatch):
    monkeypatch.setattr(main_handler, "f_dispatch", _skew_theorem)
    code, out, _ = run(capsys, "eval", "--n", "4", "--m", "2", "--k", "2")
    assert code == EXIT_FAILURE
    assert "consensus: false" in out
    assert any("Methods disagree on F(4,2,2)" in r.getMessage() for r in caplog.records)

    code, out, _ = run(capsys, "--format", "json", "eval", "--n", "4", "--m", "2", "--k", "2")
    document = json.loads(out)
    assert code == EXIT_FAILURE
    assert document["consensus"] is False
    assert len({row["value"] for row in document["results"]}) == 2


def test_eval_single_method_cannot_disagree(capsys, monkeypatch):
    monkeypatch.setattr(main_handler, "f_dispatch", _skew_theorem)
    assert run(capsys, "eval", "--n", "4", "--m", "2", "--k", "2", "--method", "theorem")[0] == EXIT_OK


def test_eval_values_are_decimal_strings(capsys):
    code, out, _ = run(capsys, "--format", "json", "eval", "--n", "300", "--m", "8", "--k", "6", "--method", "closed")
    assert code == EXIT_OK
    assert json.loads(out)["results"][0]["value"] == str(closed_value(300, 8, 6))


# --- poly ---

def test_poly_text(capsys):
    code, out, _ = run(capsys, "poly", "--m", "1", "--k", "2")
    assert code == EXIT_OK
    assert "F(n,1,2) = 1/3*n + 1/2*n^2 + 1/6*n^3" in out
    assert "degree: 3" in out


def test_poly_identity_sum(capsys):
    code, out, _ = run(capsys, "poly", "--m", "0", "--k", "1")
    assert code == EXIT_OK
    assert "F(n,0,1) = n\n" in out
    assert "degree: 1" in out


def test_poly_json_metadata(capsys):
    code, out, _ = run(capsys, "poly", "--m", "3", "--k", "1", "--format", "json")
    document = json.loads(out)
    assert code == EXIT_OK
    assert document["degree"] == 4
    assert document["leading_coefficient"] == "1/4"
    assert document["plain"] == "1/4*n^2 + 1/2*n^3 + 1/4*n^4"


def test_poly_latex_and_csv(capsys):
    _, out, _ = run(capsys, "poly", "--m", "1", "--k", "1", "--style", "latex")
    assert r"\frac{1}{2} n + \frac{1}{2} n^{2}" in out
    _, out, _ = run(capsys, "poly", "--m", "1", "--k", "1", "--format", "csv")
    assert out == "power,numerator,denominator\n1,1,2\n2,1,2\n"


def test_poly_rejects_zero_depth(capsys):
    assert run(capsys, "poly", "--m", "1", "--k", "0")[0] == EXIT_USAGE


# --- verify ---

def test_verify_small_grid_passes(capsys):
    code, out, _ = run(capsys, "verify", "--n-max", "6", "--m-max", "3", "--k-max", "3")
    assert code == EXIT_OK
    assert "0 failures" in out


def test_verify_kernel_only(capsys):
    code, out, _ = run(capsys, "--format", "json", "verify", "--identity", "kernel", "--n-max", "40", "--k-max", "8")
    document = json.loads(out)
    assert code == EXIT_OK
    assert list(document["summary"]) == ["kernel"]
    assert document["total_cases"] == 8 * 40 * 41 // 2
    assert all(case["pass"] for case in document["cases"])


def test_verify_json_case_schema(capsys):
    code, out, _ = run(capsys, "verify", "--n-max", "2", "--m-max", "1", "--k-max", "1", "--format", "json")
    case = json.loads(out)["cases"][0]
    assert code == EXIT_OK
    assert set(case) == {"identity", "n", "m", "k", "r", "lhs", "rhs", "pass"}


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "--format", "csv", "verify", "--identity", "theorem1",
                       "--n-max", "2", "--m-max", "1", "--k-max", "1")
    lines = out.splitlines()
    assert code == EXIT_OK
    assert lines[0] == "identity,n,m,k,r,lhs,rhs,pass"
    assert len(lines) == 1 + 2


@pytest.mark.parametrize("argv", [
    ["verify", "--n-max", "0", "--m-max", "8", "--k-max", "6"],
    ["verify", "--k-max", "0"],
    ["verify", "--identity", "nonsense"],
])
def test_verify_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_verify_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(core_verify, "F", lambda n, m, k: closed_value(n, m, k) + (n == 2))
    code, out, _ = run(capsys, "verify", "--identity", "theorem1", "--n-max", "3", "--m-max", "2", "--k-max", "2")
    assert code == EXIT_FAILURE
    assert "FAIL theorem1" in out


# --- oeis-check ---

def test_oeis_check_default_bindings(capsys):
    code, out, _ = run(capsys, "--format", "json", "oeis-check", "--count", "20")
    document = json.loads(out)
    assert code == EXIT_OK
    assert [r["sequence_id"] for r in document["results"]] == ["A000292", "A000332", "A000537"]
    assert all(r["passed"] for r in document["results"])


def test_oeis_check_single_sequence_shows_anchor(capsys):
    code, out, _ = run(capsys, "oeis-check", "--sequence", "A000537", "--count", "5")
    assert code == EXIT_OK
    assert "n=3 -> 36" in out


def test_oeis_check_insufficient_terms(capsys):
    code, out, err = run(capsys, "oeis-check", "--count", "1000000")
    assert code == EXIT_EXTERNAL_DATA
    assert out == ""
    assert "1000000 terms requested" in err


def test_oeis_check_bad_sequence_id(capsys):
    assert run(capsys, "oeis-check", "--sequence", "A999999x")[0] == EXIT_EXTERNAL_DATA


def test_oeis_check_mismatch_exit_code(capsys, tmp_path):
    (tmp_path / "b000292.txt").write_text("1 1\n2 4\n3 11\n")
    code, out, _ = run(capsys, "oeis-check", "--sequence", "A000292", "--count", "3", "--fixture-dir", str(tmp_path))
    assert code == EXIT_FAILURE
    assert "MISMATCH n=3" in out


def test_oeis_refresh_writes_fixtures(capsys, monkeypatch, tmp_path, fixture_dir, fake_response):
    from shared.clients import oeis_client

    body = (fixture_dir / "b000537.txt").read_text()
    monkeypatch.setattr(oeis_client.requests, "get", lambda url, timeout: fake_response(body))
    code, _, _ = run(capsys, "oeis-check", "--sequence", "A000537", "--source", "remote",
                     "--write-fixtures", "--fixture-dir", str(tmp_path))
    assert code == EXIT_OK
    assert (tmp_path / "b000537.txt").read_text().splitlines()[1:4] == ["0 0", "1 1", "2 9"]


# --- bench ---

def test_bench_two_methods(capsys):
    code, out, _ = run(capsys, "--format", "json", "bench", "--n-max", "30", "--m-max", "3", "--k-max", "3",
                       "--methods", "closed,theorem")
    document = json.loads(out)
    assert code == EXIT_OK
    assert [r["method"] for r in document["results"]] == ["closed", "theorem"]
    assert len({r["values_hash"] for r in document["results"]}) == 1


def test_bench_repetitions(capsys):
    code, out, _ = run(capsys, "bench", "--n-max", "5", "--m-max", "1", "--k-max", "1", "--repetitions", "3",
                       "--methods", "direct")
    assert code == EXIT_OK
    assert "values hash consensus" in out


@pytest.mark.parametrize("argv", [
    ["bench", "--methods", "closed,bogus"],
    ["bench", "--repetitions", "0", "--n-max", "2"],
    ["bench", "--n-max", "0"],
])
def test_bench_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_bench_disagreement_prints_no_timings(capsys, monkeypatch):
    def skewed(q, method, session=None):
        value = f_dispatch(q, method, session)
        return value + 1 if method is EvalMethod.THEOREM and q.n == 2 else value

    monkeypatch.setattr(core_bench, "f_dispatch", skewed)
    code, out, err = run(capsys, "bench", "--n-max", "4", "--m-max", "2", "--k-max", "2", "--methods", "closed,theorem")
    assert code == EXIT_FAILURE
    assert out == ""
    assert "hash disagreement" in err


def test_format_flag_after_subcommand(capsys):
    code, out, _ = run(capsys, "eval", "--n", "2", "--m", "1", "--k", "3", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["consensus"] is True


def test_unknown_log_level_falls_back_to_info(capsys, caplog, monkeypatch):
    monkeypatch.setenv("HYPERSUM_LOG_LEVEL", "verbose")
    code, out, _ = run(capsys, "eval", "--n", "3", "--m", "1", "--k", "1", "--method", "closed")
    assert code == EXIT_OK
    assert "closed" in out
    assert any("Unknown HYPERSUM_LOG_LEVEL 'VERBOSE'" in r.getMessage() for r in caplog.records)
