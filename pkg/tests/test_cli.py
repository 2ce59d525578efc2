import subprocess
import sys

import pytest

from sscl.cli import main
from sscl.harness import parse_cv_csv, parse_sweep_csv


@pytest.fixture
def data_csv(tmp_path):
    p = tmp_path / "d.csv"
    assert main(["gen", "--kind", "two-gauss", "--n", "40", "--d", "3", "--seed", "7",
                 "--sep", "3", "--out", str(p)]) == 0
    return p


def test_gen_writes_loadable_csv(data_csv):
    from sscl.data import load_csv
    d = load_csv(data_csv)
    assert (d.n, d.d) == (40, 3)
    assert data_csv.read_text().startswith("# sscl ")


def test_cv_output(data_csv, tmp_path):
    out = tmp_path / "r.csv"
    rc = main(["cv", "--data", str(data_csv), "--method", "sscl", "--k", "4", "--folds", "5",
               "--max-outer", "3", "--out", str(out)])
    assert rc == 0
    text = out.read_text()
    assert "# gamma=0.1" in text and "# seed=42" in text
    assert "method,fold,accuracy,seconds" in text
    assert len(parse_cv_csv(text)["sscl"]) == 5


def test_cv_timings_flag(data_csv, tmp_path):
    out = tmp_path / "r.csv"
    main(["cv", "--data", str(data_csv), "--method", "knn", "--k", "3", "--folds", "4",
          "--timings", "--out", str(out)])
    row = out.read_text().splitlines()[-1].split(",")
    assert float(row[3]) >= 0


def test_guard_violation_exit_code(data_csv, capsys):
    rc = main(["train", "--alpha", "2", "--beta", "1", "--data", str(data_csv)])
    assert rc == 2
    assert "alpha <= sqrt(2*beta)" in capsys.readouterr().err


def test_k_too_large_is_validation_error(data_csv, capsys):
    assert main(["cv", "--data", str(data_csv), "--k", "39", "--folds", "5"]) == 2
    assert "k must be" in capsys.readouterr().err


def test_unknown_subcommand_and_flag():
    assert subprocess.run([sys.executable, "-m", "sscl", "frobnicate"],
                          capture_output=True).returncode == 2
    r = subprocess.run([sys.executable, "-m", "sscl", "cv", "--bogus"], capture_output=True, text=True)
    assert r.returncode == 2 and "usage" in r.stderr


def test_missing_data_file_is_runtime_error(tmp_path, capsys):
    assert main(["cv", "--data", str(tmp_path / "none.csv")]) == 1


@pytest.mark.parametrize("cmd", ["cv", "sweep", "train", "baseline", "gen", "predict"])
def test_help_documents_defaults(cmd):
    r = subprocess.run([sys.executable, "-m", "sscl", cmd, "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    if cmd in ("cv", "sweep", "train", "baseline"):
        for flag in ("--k", "--alpha", "--beta", "--gamma"):
            assert flag in r.stdout
        assert "default: 10" in r.stdout and "default: 0.1" in r.stdout


def test_train_then_predict(data_csv, tmp_path):
    model = tmp_path / "m.txt"
    pred = tmp_path / "p.csv"
    assert main(["train", "--data", str(data_csv), "--k", "4", "--max-outer", "5",
                 "--out", str(model)]) == 0
    assert model.read_text().startswith("SSCL v1")
    assert main(["predict", "--model", str(model), "--data", str(data_csv), "--out", str(pred)]) == 0
    rows = [r for r in pred.read_text().splitlines() if not r.startswith("#")]
    assert rows[0] == "index,true_label,predicted,score_0,score_1"
    correct = sum(r.split(",")[1] == r.split(",")[2] for r in rows[1:])
    assert correct / 40 >= 0.9


def test_predict_to_stdout(data_csv, tmp_path, capsys):
    model = tmp_path / "m.txt"
    main(["train", "--data", str(data_csv), "--k", "4", "--max-outer", "2", "--out", str(model)])
    capsys.readouterr()
    assert main(["predict", "--model", str(model), "--data", str(data_csv)]) == 0
    assert "index,true_label,predicted" in capsys.readouterr().out


def test_sweep_and_baseline(data_csv, tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--data", str(data_csv), "--method", "knn", "--param", "alpha",
                 "--values", "1,1.5", "--folds", "4", "--out", str(out)]) == 0
    rows = parse_sweep_csv(out.read_text())
    assert rows[1]["skipped"] == "skipped: convexity guard"
    out2 = tmp_path / "b.csv"
    assert main(["baseline", "--data", str(data_csv), "--k", "3", "--folds", "4",
                 "--out", str(out2)]) == 0
    assert set(parse_cv_csv(out2.read_text())) == {"knn", "srbc"}
    assert main(["baseline", "--data", str(data_csv), "--methods", "sscl"]) == 2


def test_log_env(data_csv, tmp_path):
    env = {"SSCL_LOG": "info", "PATH": ""}
    r = subprocess.run([sys.executable, "-m", "sscl", "cv", "--data", str(data_csv), "--method",
                        "knn", "--k", "3", "--folds", "4", "--out", str(tmp_path / "x.csv")],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0 and "mean accuracy" in r.stderr
