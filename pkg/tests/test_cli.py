import json

import numpy as np
import pytest

from ajive.blocks import read_matrix
from ajive.cli import main


@pytest.fixture(scope="module")
def toy_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("toy")
    assert main(["toy", "--seed", "3", "--out", str(out)]) == 0
    return out


def test_toy_files(toy_dir):
    x, _, _ = read_matrix(toy_dir / "X.csv")
    y, _, _ = read_matrix(toy_dir / "Y.csv")
    assert x.shape == (100, 100) and y.shape == (10000, 100)
    assert (toy_dir / "manifest.ini").exists()
    truth = toy_dir / "truth"
    for name in ("joint_X.csv", "individual_Y.csv", "noise_Y.csv", "joint_scores.csv", "config.json"):
        assert (truth / name).exists()
    assert json.loads((truth / "config.json").read_text())["seed"] == 3


def test_toy_overrides_and_determinism(tmp_path):
    args = ["toy", "--seed", "1", "--set", "y_features=200", "--set", "y_joint_rows=50"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "Y.csv").read_bytes() == (tmp_path / "b" / "Y.csv").read_bytes()
    assert read_matrix(tmp_path / "a" / "Y.csv")[0].shape == (200, 100)
    assert main(["toy", "--set", "nonsense=1", "--out", str(tmp_path / "c")]) == 2


def test_scree(toy_dir, tmp_path):
    assert main(["scree", "--manifest", str(toy_dir / "manifest.ini"), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "scree_X.csv").read_text().splitlines()
    assert lines[0] == "index,singular_value" and len(lines) == 101


def test_diagnose_grid(toy_dir, tmp_path):
    rc = main(["diagnose", "--manifest", str(toy_dir / "manifest.ini"), "--grid", "2,2 2,3", "--out", str(tmp_path)])
    assert rc == 0
    d = json.loads((tmp_path / "diagnostics_2_3.json").read_text())
    assert d["joint_rank_candidate"] == 1
    assert json.loads((tmp_path / "diagnostics_2_2.json").read_text())["joint_rank_candidate"] == 0
    assert (tmp_path / "grid_summary.csv").read_text().count("\n") == 3


def test_analyze_with_verify_is_deterministic(toy_dir, tmp_path):
    base = ["analyze", "--manifest", str(toy_dir / "manifest.ini"), "--ranks", "2,3", "--replicates", "200", "--verify"]
    assert main(base + ["--out", str(tmp_path / "a")]) == 0
    assert main(base + ["--out", str(tmp_path / "b")]) == 0
    s = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert s["joint_rank"] == 1 and s["individual_ranks"] == {"X": 1, "Y": 2}
    for name in ("cns_scores.csv", "joint_X.csv", "individual_Y.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_analyze_positional_blocks_and_env_out(toy_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("AJIVE_OUT", str(tmp_path / "env"))
    rc = main(["analyze", str(toy_dir / "X.csv"), str(toy_dir / "Y.csv"), "--ranks", "2,3", "--joint-rank", "1"])
    assert rc == 0
    assert json.loads((tmp_path / "env" / "summary.json").read_text())["joint_rank"] == 1


def test_simulate_small(tmp_path):
    rc = main(["simulate", "--trials", "2", "--block", "X", "--replicates", "20", "--out", str(tmp_path)])
    assert rc == 0
    rows = (tmp_path / "coverage.csv").read_text().splitlines()
    assert rows[1] == "X,rank,1,2,3" and len(rows) == 6


def test_baselines(toy_dir, tmp_path):
    m = str(toy_dir / "manifest.ini")
    assert main(["baseline", "concat", "--manifest", m, "--rank", "2", "--out", str(tmp_path)]) == 0
    assert read_matrix(tmp_path / "concat_Y.csv")[0].shape == (10000, 100)
    assert main(["baseline", "pls", "--manifest", m, "--components", "3", "--out", str(tmp_path)]) == 0
    assert read_matrix(tmp_path / "pls_scores_X.csv")[0].shape == (3, 100)
    assert len(json.loads((tmp_path / "pls_covariances.json").read_text())) == 3


def test_errors_exit_2(tmp_path, capsys):
    assert main(["analyze", str(tmp_path / "missing.csv"), str(tmp_path / "m2.csv"), "--ranks", "1,1", "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err.lower()
    np.savetxt(tmp_path / "a.csv", np.ones((3, 4)), delimiter=",")
    np.savetxt(tmp_path / "b.csv", np.ones((3, 5)), delimiter=",")
    assert main(["scree", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"), "--out", str(tmp_path)]) == 2
