import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest
import yaml

from camouflage.cli import main
from camouflage.harness import ConfigError, ExperimentConfig, certify, run_experiment
from camouflage.io import mdp_to_dict
from camouflage import build_ring


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_config_field_errors():
    with pytest.raises(ConfigError) as exc:
        ExperimentConfig.from_dict({"environment": "mars", "budgets": [-1], "bogus": 1, "n": 0})
    text = str(exc.value)
    for field in ("environment", "budgets", "bogus", "n"):
        assert field in text


def test_run_writes_bundle(tmp_path):
    cfg = ExperimentConfig.from_dict({"environment": "ring-v1", "budgets": [1, 2], "bounds": True,
                                      "epsilon_sensitivity": [0.1, 0.5, 1.0]})
    res = run_experiment(cfg, out_dir=tmp_path)
    assert res.ok
    rows = read_csv(tmp_path / "trajectories.csv")
    assert rows[0] == ["time_index", "no_attack", "camouflage", "state_perception", "budget_1", "budget_2"]
    assert len(rows) == 7 and rows[1][1:] == ["0"] * 5
    table = np.array(rows[1:], dtype=float)
    assert (table[:, 3] <= table[:, 2] + 1e-9).all() and (table[:, 2] <= table[:, 1] + 1e-9).all()
    for name in ("summary.csv", "bounds.csv", "epsilon_sensitivity.csv", "orientation.csv", "manifest.json"):
        assert (tmp_path / name).exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["n"] == 2 and len(manifest["orientation"]["settings"]) == 4


def test_zero_horizon_single_zero_row(tmp_path):
    cfg = ExperimentConfig.from_dict({"environment": "ring-v1", "horizon": 0})
    run_experiment(cfg, out_dir=tmp_path)
    rows = read_csv(tmp_path / "trajectories.csv")
    assert rows[1:] == [["0", "0", "0", "0"]]


def test_outputs_byte_identical(tmp_path):
    cfg = ExperimentConfig.from_dict({"environment": "ring-v1", "budgets": [1], "episodes": 500})
    run_experiment(cfg, out_dir=tmp_path / "a", seed=5)
    run_experiment(cfg, out_dir=tmp_path / "b", seed=5)
    for name in ("trajectories.csv", "summary.csv", "rollouts.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_changes_rollouts_not_exact(tmp_path):
    cfg = ExperimentConfig.from_dict({"environment": "ring-v1", "episodes": 500})
    run_experiment(cfg, out_dir=tmp_path / "a", seed=1)
    run_experiment(cfg, out_dir=tmp_path / "b", seed=2)
    assert (tmp_path / "a/trajectories.csv").read_bytes() == (tmp_path / "b/trajectories.csv").read_bytes()
    ra, rb = read_csv(tmp_path / "a/rollouts.csv"), read_csv(tmp_path / "b/rollouts.csv")
    assert [r[3] for r in ra[1:]] != [r[3] for r in rb[1:]]


def test_transposed_rewards_shift_ratios_but_keep_ordering(tmp_path):
    a = run_experiment(ExperimentConfig.from_dict({"environment": "ring-v1", "orientation_report": False}),
                       out_dir=tmp_path / "a")
    b = run_experiment(ExperimentConfig.from_dict({"environment": "ring-v1", "orientation_report": False,
                                                    "overrides": {"reward_orientation": "rows-origin"}}),
                       out_dir=tmp_path / "b")
    assert a.ok and b.ok and a.ratios["camouflage"] != b.ratios["camouflage"]


def test_inline_instance(tmp_path):
    mdp, _ = build_ring()
    doc = {"instance": {"mdp": mdp_to_dict(mdp), "scheme": {"kind": "table", "own": [[0, 1, 2], [1, 2, 0]]}},
           "n": 2}
    res = run_experiment(ExperimentConfig.from_dict(doc), out_dir=tmp_path)
    assert res.ok and res.ratios["camouflage"] < 1


def test_certify_default_suite_passes():
    cfg = ExperimentConfig.from_dict({"environment": "ring-v1", "certify_instances": 10})
    checks = certify(cfg)
    assert checks and all(c.passed for c in checks), [c for c in checks if not c.passed]


def test_cli_run_and_env_override(tmp_path, monkeypatch, capsys):
    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump({"environment": "ring-v1", "output_dir": str(tmp_path / "cfgdir")}))
    monkeypatch.setenv("CAMOUFLAGE_OUT", str(tmp_path / "envdir"))
    assert main(["run", str(path)]) == 0
    assert (tmp_path / "envdir/summary.csv").exists()
    assert main(["run", str(path), "--out", str(tmp_path / "flag"), "--episodes", "200", "--seed", "3"]) == 0
    assert (tmp_path / "flag/rollouts.csv").exists()
    bad = tmp_path / "bad.yaml"
    bad.write_text("environment: nowhere\n")
    assert main(["run", str(bad)]) == 2
    assert "environment" in capsys.readouterr().err


def test_cli_exit_status_follows_checks(tmp_path, monkeypatch):
    import camouflage.cli as cli
    from camouflage.harness import Check, RunResult

    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump({"environment": "ring-v1"}))
    for passed, code in ((True, 0), (False, 1)):
        fake = RunResult({}, {}, [Check("x", passed)], {}, {})
        monkeypatch.setattr(cli, "run_experiment", lambda *a, **k: fake)
        assert cli.main(["run", str(path)]) == code


def test_module_entry_point(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump({"environment": "ring-v1", "certify_instances": 3}))
    out = subprocess.run([sys.executable, "-m", "camouflage", "certify", str(path)],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "PASS" in out.stdout
