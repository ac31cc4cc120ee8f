import json

import pytest

from rightinverse.cli import main
from rightinverse.experiments import EXPERIMENTS, ExperimentConfig, list_experiments

SMALL_BV = {"experiment": "bv-jumpstart", "n_paths": 8, "horizon": 100.0}


def _write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_list_is_stable(capsys):
    assert main(["list"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 8
    assert [r[0] for r in list_experiments()] == [e.name for e in EXPERIMENTS]
    assert any(line.startswith("theorem1") and "genexc" in line for line in lines)


@pytest.mark.parametrize("doc", [{"experiment": "nope"},
                                 {"experiment": "wiener-hopf", "unknown_key": 1},
                                 {"experiment": "rho-routes", "dt": -1.0},
                                 {"experiment": "rho-routes", "q_grid": []},
                                 {"experiment": "rho-routes", "model": {"family": "brownian",
                                                                        "sigma2": -1.0}}])
def test_config_errors_exit_2(tmp_path, capsys, doc):
    assert main(["run", "--config", _write(tmp_path, doc), "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_unreadable_config_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["--config", str(bad)]) == 2
    assert main(["--config", str(tmp_path / "missing.json")]) == 2
    assert main(["--experiment", "wiener-hopf", "--workers", "0"]) == 2
    assert main(["--experiment", "wiener-hopf", "--seed", "-1"]) == 2


def test_sigpos_needs_gaussian_part(tmp_path):
    doc = {"experiment": "sigpos", "model": {"family": "bv_atoms", "b": 1.0, "rate": 1.0,
                                             "sizes": [-1.0], "probs": [1.0]}}
    assert main(["--config", _write(tmp_path, doc), "--out", str(tmp_path / "o")]) == 2


def test_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["run", "--experiment", "wiener-hopf", "--out", str(out), "--seed", "5"]) == 0
    report = json.loads((out / "report.json").read_text())
    manifest = json.loads((out / "manifest.json").read_text())
    assert report["pass"] and report["config"]["seed"] == 5
    assert manifest["seed"] == 5 and manifest["config_hash"] == report["config_hash"]
    assert "timestamp" in manifest and "timestamp" not in report
    for t in manifest["tables"]:
        assert (out / t).exists()
    assert "PASS wiener-hopf" in capsys.readouterr().out


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("RIGHTINVERSE_OUT", str(tmp_path / "env"))
    assert main(["--experiment", "wiener-hopf"]) == 0
    assert (tmp_path / "env" / "report.json").exists()


def test_report_is_bit_identical(tmp_path):
    cfg = _write(tmp_path, SMALL_BV)
    code = main(["--config", cfg, "--out", str(tmp_path / "a")])
    assert main(["--config", cfg, "--out", str(tmp_path / "b"), "--workers", "2"]) == code
    a = (tmp_path / "a" / "report.json").read_bytes()
    b = (tmp_path / "b" / "report.json").read_bytes()
    assert a == b
    for t in json.loads((tmp_path / "a" / "manifest.json").read_text())["tables"]:
        assert (tmp_path / "a" / t).read_bytes() == (tmp_path / "b" / t).read_bytes()


def test_failed_check_exits_1(tmp_path, capsys):
    doc = dict(SMALL_BV, params={"rel_tol": 1e-9})
    assert main(["--config", _write(tmp_path, doc), "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "bv-jumpstart-rate" in err and "statistic" in err


def test_insufficient_data_exits_1(tmp_path):
    doc = {"experiment": "theorem1", "n_paths": 10, "horizon": 6.0}
    assert main(["--config", _write(tmp_path, doc), "--out", str(tmp_path / "o")]) == 1


def test_config_digest_tracks_content():
    a = ExperimentConfig.from_dict({"experiment": "wiener-hopf", "seed": 1})
    b = ExperimentConfig.from_dict({"experiment": "wiener-hopf", "seed": 2})
    assert a.digest() != b.digest()
    assert a.digest() == ExperimentConfig.from_dict(a.to_dict()).digest()
