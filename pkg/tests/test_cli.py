import json
from pathlib import Path

import numpy as np
import pytest

from agm.cli import EXIT_ACCEPTANCE, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION, main
from agm.expectations import MatrixTuple
from agm.io import write_tuple


@pytest.fixture(autouse=True)
def _cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_frame_bias(capsys):
    code, out, _ = run(capsys, "check", "--frames-2d", "4", "--k", "4", "--ineq", "bias", "--json")
    assert code == EXIT_OK
    assert json.loads(out)["verdicts"]["bias"]["holds"]


def test_check_triple_file(capsys, tmp_path):
    t = MatrixTuple([np.array([[7.0, 0.0], [0.0, 0.0]]), np.ones((2, 2)), np.ones((2, 2))])
    write_tuple(tmp_path / "tuple.json", t)
    code, out, _ = run(capsys, "check", "--file", "tuple.json", "--ineq", "all", "--k", "2", "--json")
    p = json.loads(out)
    assert code == EXIT_OK
    assert p["verdicts"]["bias"]["holds"]
    assert p["verdicts"]["psd-order"]["k=3"]["holds"] is False
    assert p["verdicts"]["psd-order"]["k=3"]["witness_eigenvalue"] < 0


def test_check_random_sweep(capsys):
    code, out, _ = run(capsys, "check", "--random-psd", "n=4,d=3", "--sweeps", "1000", "--seed", "7", "--json")
    p = json.loads(out)
    assert code == EXIT_OK and p["violations"] == 0 and p["tuples"] == 1000


def test_check_violation_exit_and_ledger(capsys, tmp_path):
    code, out, _ = run(capsys, "check", "--frames-2d", "4", "--ineq", "strong", "--json")
    assert code == EXIT_VIOLATION
    lines = (tmp_path / "violations.jsonl").read_text().splitlines()
    assert len(lines) == 1 and json.loads(lines[0])["inequality"] == "strong"


@pytest.mark.parametrize("argv", [
    ["check", "--file", "absent.json"],
    ["check", "--frames-2d", "4", "--ineq", "nonsense"],
    ["check", "--frames-2d", "2"],
    ["check", "--frames-2d", "3", "--k", "5"],
    ["check"],
    ["frames"],
    ["lambda", "--n", "9", "--bruteforce"],
    ["nope"],
    ["--seed", "-3", "lambda", "--n", "4"],
    ["--threads", "0", "lambda", "--n", "4"],
])
def test_input_errors_exit_one(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == EXIT_INPUT


def test_malformed_file_exit_one(capsys, tmp_path):
    (tmp_path / "bad.json").write_text('{"d": 2}')
    code, _, err = run(capsys, "check", "--file", "bad.json")
    assert code == EXIT_INPUT and "error" in err


def test_global_flags_any_position(capsys):
    a = run(capsys, "--seed", "5", "--json", "lambda", "--n", "5")
    b = run(capsys, "lambda", "--n", "5", "--seed", "5", "--json", "--threads", "auto")
    assert a[0] == b[0] == EXIT_OK and a[1] == b[1]


def test_frames_writes_tuple(capsys, tmp_path):
    code, _, _ = run(capsys, "frames", "--n", "5", "--d", "3", "--out", "f.json")
    assert code == EXIT_OK
    assert json.loads((tmp_path / "f.json").read_text())["n"] == 5
    assert (tmp_path / "f.json.manifest.json").exists()
    code, out, _ = run(capsys, "frames", "--n", "3")
    assert json.loads(out)["d"] == 2


def test_lambda(capsys):
    code, out, _ = run(capsys, "lambda", "--n", "3", "--json")
    p = json.loads(out)
    assert code == EXIT_OK and p["series_exact"] == "-1/2"
    assert p["alpha_bruteforce"] == pytest.approx(-1 / 16)


def test_wishart(capsys):
    code, out, _ = run(capsys, "wishart", "--samples", "2000", "--d", "2", "--r", "2")
    p = json.loads(out)
    assert code == EXIT_OK and p["square"]["zeta"] == pytest.approx(2 * 5)
    assert set(p["entry_pairs"]) == {"same-pair-diagonal", "same-pair-offdiagonal", "distinct-diagonal", "mismatched"}


@pytest.mark.parametrize("method", ["kaczmarz", "igm"])
def test_experiments_and_replay(capsys, tmp_path, method):
    argv = [method, "--n", "6", "--d", "4", "--trials", "5", "--epochs", "2", "--rows", "haar",
            "--seed", "3", "--out", "run/trace.csv"]
    assert run(capsys, *argv)[0] == EXIT_OK
    trace, summary = tmp_path / "run/trace.csv", tmp_path / "run/trace_summary.csv"
    assert trace.read_text().splitlines()[0] == "iter,trial,scheme,error"
    assert len(trace.read_text().splitlines()) == 1 + 2 * 5 * 13
    assert summary.read_text().splitlines()[0] == "iter,scheme,median_error,mean_error,stderr"
    before = trace.read_bytes(), summary.read_bytes()
    assert run(capsys, "replay", "run/trace.csv.manifest.json")[0] == EXIT_OK
    assert (trace.read_bytes(), summary.read_bytes()) == before


def test_rows_file(capsys, tmp_path):
    np.save(tmp_path / "rows.npy", np.eye(3))
    code, out, _ = run(capsys, "kaczmarz", "--rows", "file", "--rows-file", "rows.npy", "--trials", "2",
                       "--epochs", "1", "--json", "--out", "k.csv")
    assert code == EXIT_OK
    assert json.loads(out)["median_final_error"]["without-replacement-permutation"] <= 1e-12


def test_figure1_command_small(capsys, tmp_path):
    argv = ["figure1", "--trials", "1", "--epochs", "1", "--d", "6", "--n", "8", "--out", "fig", "--json"]
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_OK
    files = json.loads(out)["files"]
    assert len(files) == 6 and all(Path(f + ".manifest.json").exists() for f in files)
    first = [Path(f).read_bytes() for f in files]
    run(capsys, *argv)
    assert [Path(f).read_bytes() for f in files] == first


def test_report_bundle_pass_and_negative_control(capsys, tmp_path):
    code, out, _ = run(capsys, "report-bundle", "--only", "4,8", "--out", "b", "--json")
    assert code == EXIT_OK
    assert json.loads(out)["all_passed"]
    for name in ("criterion_04.json", "criterion_08.json", "summary.json"):
        assert (tmp_path / "b" / name).exists()
        assert (tmp_path / "b" / (name + ".manifest.json")).exists()
    code, out, _ = run(capsys, "report-bundle", "--only", "4", "--set", "c4_tail=0.001", "--out", "b2")
    assert code == EXIT_ACCEPTANCE
    assert "[FAIL] criterion  4" in out
    summary = json.loads((tmp_path / "b2" / "summary.json").read_text())
    assert summary["all_passed"] is False


def test_report_bundle_bad_override(capsys):
    assert run(capsys, "report-bundle", "--set", "bogus=1")[0] == EXIT_INPUT
    assert run(capsys, "report-bundle", "--only", "99")[0] == EXIT_INPUT
