import csv
import json
import math

import numpy as np
import pytest

from tailrank.cli import DatasetSpec, ingest, main
from tailrank.errors import DataError, EmptySubsetError, SchemaError


def write(path, text):
    path.write_text(text)
    return path


def test_ingest_fixture_with_missing_filter(tmp_path):
    p = write(tmp_path / "a.csv", "SEX,LOSS\nF,1.5\nNA,2.0\nF,3.0\nF,4.5\n")
    assert ingest(DatasetSpec(str(p), "LOSS", ("SEX", "F"), drop_missing=True)).n == 3
    assert ingest(DatasetSpec(str(p), "LOSS")).n == 4


def test_ingest_autobi_counts(autobi_csv):
    assert ingest(DatasetSpec(str(autobi_csv), "LOSS")).n == 1340
    assert ingest(DatasetSpec(str(autobi_csv), "LOSS", ("CLMSEX", "F"), True)).n == 742
    assert ingest(DatasetSpec(str(autobi_csv), "LOSS", ("CLMSEX", "M"), True)).n == 586


def test_ingest_errors(tmp_path):
    p = write(tmp_path / "b.csv", "X,LOSS\n1,2.0\n2,abc\n")
    with pytest.raises(DataError, match="row 3"):
        ingest(DatasetSpec(str(p), "LOSS"))
    p = write(tmp_path / "c.csv", "X,LOSS\n1,2.0\n2,-1\n")
    with pytest.raises(DataError, match="row 3"):
        ingest(DatasetSpec(str(p), "LOSS"))
    p = write(tmp_path / "d.csv", "X,LOSS\n1,NA\n")
    with pytest.raises(DataError, match="row 2"):
        ingest(DatasetSpec(str(p), "LOSS"))
    with pytest.raises(EmptySubsetError):
        ingest(DatasetSpec(str(p), "LOSS", drop_missing=True))
    with pytest.raises(SchemaError):
        ingest(DatasetSpec(str(p), "AMOUNT"))
    with pytest.raises(SchemaError):
        ingest(DatasetSpec(str(p), "LOSS", ("SEX", "F")))


@pytest.fixture
def pareto_file(tmp_path):
    assert main(["simulate", "--dgp", "pareto", "--gamma", "1", "--n", "20000", "--seed", "11",
                 "--out-dir", str(tmp_path / "sim")]) == 0
    return tmp_path / "sim" / "sample.csv"


def test_score_command(pareto_file, tmp_path):
    args = ["score", "--input", str(pareto_file), "--value-column", "value", "--k-min", "50",
            "--k-points", "100", "--candidates", "0.8,1,1.2,1.5"]
    assert main(args + ["--out-dir", str(tmp_path / "o1")]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "o2")]) == 0
    rank = json.loads((tmp_path / "o1" / "ranking.json").read_text())
    assert rank["order"][0] == 1.0
    for name in ("score_curves.csv", "ranking.json"):
        assert (tmp_path / "o1" / name).read_bytes() == (tmp_path / "o2" / name).read_bytes()
    rows = list(csv.DictReader((tmp_path / "o1" / "score_curves.csv").open()))
    ref = [r for r in rows if r["candidate_gamma"] == "1.0"]
    assert all(r["ci_low"] for r in ref) and not any(r["ci_low"] for r in rows if r["candidate_gamma"] != "1.0")
    man = json.loads((tmp_path / "o1" / "manifest.json").read_text())
    assert man["command"] == "score" and man["config"]["k_grid"][0] == 50


def test_score_single_candidate(pareto_file, tmp_path):
    assert main(["score", "--input", str(pareto_file), "--value-column", "value", "--candidates", "1.3",
                 "--format", "json", "--out-dir", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "ranking.json").read_text())["order"] == [1.3]
    assert (tmp_path / "o" / "score_curves.json").exists()


def test_estimate_command(tmp_path):
    p = write(tmp_path / "e.csv", "v\n" + "\n".join(repr(x) for x in [1.0, math.e, math.e ** 2, math.e ** 3]) + "\n")
    assert main(["estimate", "--input", str(p), "--value-column", "v", "--k-list", "3", "--method", "hill",
                 "--out-dir", str(tmp_path / "o")]) == 0
    rows = list(csv.DictReader((tmp_path / "o" / "estimates.csv").open()))
    assert float(rows[0]["gamma_hat"]) == pytest.approx(2.0, abs=1e-14)


def test_estimate_logs_agrees_with_hill(pareto_file, tmp_path):
    assert main(["estimate", "--input", str(pareto_file), "--value-column", "value", "--k-min", "50",
                 "--k-points", "20", "--grid-lo", "0.5", "--grid-hi", "2", "--grid-points", "150",
                 "--out-dir", str(tmp_path / "o")]) == 0
    rows = list(csv.DictReader((tmp_path / "o" / "estimates.csv").open()))
    hill = {r["k"]: float(r["gamma_hat"]) for r in rows if r["method"] == "hill"}
    opt = {r["k"]: float(r["gamma_hat"]) for r in rows if r["method"] == "logs"}
    assert hill.keys() == opt.keys()
    step = 1.5 / 149
    assert all(abs(hill[k] - opt[k]) <= step for k in hill)


def test_invalid_beta_leaves_no_output(pareto_file, tmp_path, capsys):
    out = tmp_path / "bad"
    code = main(["estimate", "--input", str(pareto_file), "--value-column", "value", "--k-list", "100",
                 "--method", "both", "--rule", "es:0.9", "--out-dir", str(out)])
    assert code != 0
    assert not out.exists() or not any(out.iterdir())
    assert "beta" in capsys.readouterr().err


def test_missing_column_exit_status(pareto_file, tmp_path):
    assert main(["score", "--input", str(pareto_file), "--value-column", "LOSS", "--out-dir", str(tmp_path / "o")]) == 1


def test_experiment_command(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(
        "experiment: estimator\n"
        "dgp: {family: frechet, gamma: [0.33, 0.66, 1.0, 1.33]}\n"
        "n_values: [1000]\n"
        "k_fractions: [0.05, 0.15, 0.25]\n"
        "replications: 1\n"
        "base_seed: 3\n"
    )
    assert main(["experiment", "--config", str(cfg), "--out-dir", str(tmp_path / "a")]) == 0
    assert main(["experiment", "--config", str(cfg), "--out-dir", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "bias_variance.csv").read_bytes()
    assert a == (tmp_path / "b" / "bias_variance.csv").read_bytes()
    rows = list(csv.DictReader((tmp_path / "a" / "bias_variance.csv").open()))
    assert len(rows) == 48
    assert all(r["variance"] == "" for r in rows)


def test_experiment_bad_config(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("dgp: {family: frechet, gamma: 1}\nn_values: [1000]\nreplication: 3\ncandidates: [1]\n")
    assert main(["experiment", "--config", str(cfg), "--out-dir", str(tmp_path / "a")]) == 1
    assert "replication" in capsys.readouterr().err


def test_ranking_experiment_command(tmp_path):
    cfg = tmp_path / "r.yaml"
    cfg.write_text(
        "experiment: ranking\n"
        "dgp: {family: pareto, gamma: 1.0}\n"
        "n_values: [1000]\n"
        "candidates: [0.8, 1.0, 1.2, 1.5]\n"
        "replications: 3\n"
    )
    assert main(["experiment", "--config", str(cfg), "--out-dir", str(tmp_path / "a")]) == 0
    rows = list(csv.DictReader((tmp_path / "a" / "proportions.csv").open()))
    assert len(rows) > 0 and all(0 <= float(r["proportion"]) <= 1 for r in rows)


def test_simulate_is_deterministic(tmp_path):
    for d in ("x", "y"):
        assert main(["simulate", "--dgp", "burr", "--gamma", "0.5", "--t", "2", "--n", "100", "--seed", "4",
                     "--scaling", "sinusoidal", "--out-dir", str(tmp_path / d)]) == 0
    assert (tmp_path / "x" / "sample.csv").read_bytes() == (tmp_path / "y" / "sample.csv").read_bytes()
    vals = np.loadtxt(tmp_path / "x" / "sample.csv", skiprows=1)
    assert vals.size == 100 and np.all(vals > 0)
