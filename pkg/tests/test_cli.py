import csv
import json

import pytest

from tbctl.cli import ConfigError, RunConfig, emit_results, main, parse_config
from tbctl.measures import SUMMARY_COLUMNS
from tbctl.model import Parameters


def write(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_missing_beta_named(tmp_path):
    with pytest.raises(ConfigError, match="beta"):
        parse_config(write(tmp_path, {}), {"mode": "single"})


def test_baseline_config(tmp_path):
    cfg = parse_config(write(tmp_path, {"beta": 100, "sigma_r_rule": "sigma"}))
    assert cfg.mode == "single"
    assert cfg.parameters() == Parameters(beta=100.0)


def test_range_error_cites_constraint(tmp_path):
    with pytest.raises(ConfigError, match=r"phi ∈ \[0,1\]"):
        parse_config(write(tmp_path, {"beta": 100, "phi": 1.5}))


@pytest.mark.parametrize("doc,key", [
    ({"beta": 100, "gamma": 3}, "gamma"),
    ({"beta": 100, "mode": "optimise"}, "mode"),
    ({"beta": 100, "sigma_r": 0.5, "sigma_r_rule": "2sigma"}, "sigma_r_rule"),
    ({"mode": "sweep-beta"}, "betas"),
    ({"mode": "sweep-tf", "beta": 100, "tfs": [5, -1]}, "tfs"),
    ({"mode": "sweep-weights", "beta": 100, "w_sets": [[50, 50]]}, r"w_sets\[0\]"),
    ({"beta": 100, "max_iters": 2.5}, "max_iters"),
    ({"beta": 100, "relaxation": 0}, "relaxation"),
    ({"beta": "high"}, "beta"),
])
def test_config_errors_name_the_key(tmp_path, doc, key):
    with pytest.raises(ConfigError, match=key):
        parse_config(write(tmp_path, doc))


def test_flags_override_file(tmp_path):
    cfg = parse_config(write(tmp_path, {"beta": 100, "workers": 2}), {"beta": 150.0, "workers": None})
    assert cfg.params["beta"] == 150.0 and cfg.workers == 2


def test_config_round_trip(tmp_path):
    doc = {"mode": "sweep-weights", "beta": 120, "sigma_r_rule": "sigma/2", "strategy": "b",
           "w_sets": [[50, 5, 5], [50, 500, 500]], "tol": 1e-5, "n_steps": 500, "c2": 0.5,
           "workers": 3, "out": "somewhere"}
    cfg = parse_config(write(tmp_path, doc))
    again = parse_config(write(tmp_path, cfg.to_dict(), "echo.json"))
    assert again == cfg
    assert isinstance(cfg, RunConfig) and cfg.params["sigma_r"] == 0.125


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_single_run_files(tmp_path):
    out = tmp_path / "out"
    cfg = write(tmp_path, {"beta": 100, "sigma_r_rule": "sigma"})
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    summary = read_csv(out / "summary.csv")
    assert tuple(summary[0]) == SUMMARY_COLUMNS and len(summary) == 2
    assert summary[1][2] == "a" and summary[1][-1] == "true"
    traj = read_csv(out / "trajectory_beta100_sr0.25_a.csv")
    assert traj[0][:6] == ["t", "S", "L1", "I", "L2", "R"] and len(traj[0]) == 14
    assert len(traj) == 1 + 1001
    first = [float(v) for v in traj[1]]
    assert first[0] == 0.0
    for got, want in zip(first[1:6], (4554, 72, 24, 23950, 1400)):
        assert got == pytest.approx(want, rel=0.01)
    raw = (out / "summary.csv").read_bytes()
    assert b"\r" not in raw
    doc = json.loads((out / "batch.json").read_text())
    assert doc["version"] and doc["non_converged"] == 0
    assert parse_config(write(tmp_path, doc["config"], "echo.json")) == parse_config(cfg, {"out": str(out)})

    # rerun overwrites with identical bytes
    before = {p.name: p.read_bytes() for p in out.iterdir()}
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert before == {p.name: p.read_bytes() for p in out.iterdir()}


def test_strategy_compare_files(tmp_path):
    out = tmp_path / "cmp"
    assert main(["run", "--mode", "strategy-compare", "--beta", "100", "--out", str(out)]) == 0
    rows = read_csv(out / "summary.csv")
    assert [r[2] for r in rows[1:]] == ["a", "b", "c"]
    icer = read_csv(out / "icer.csv")
    assert icer[0] == ["strategy", "A", "TC", "ACER", "ICER", "dominated_by"]
    assert {r[0]: r[5] for r in icer[1:]}["c"] == "b"


def test_exit_codes(tmp_path, monkeypatch):
    assert main(["run"]) == 1
    assert main(["bogus"]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 1
    cfg = write(tmp_path, {"beta": 100, "max_iters": 2})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "nc")]) == 2
    monkeypatch.setenv("TB_OPTCTL_WORKERS", "zero")
    assert main(["run", "--beta", "100", "--out", str(tmp_path / "w")]) == 1


def test_env_worker_override(tmp_path, monkeypatch):
    monkeypatch.setenv("TB_OPTCTL_WORKERS", "2")
    from tbctl import cli

    seen = {}
    real_run = cli.run

    def spy(config):
        seen["workers"] = config.workers
        return real_run(config)

    monkeypatch.setattr(cli, "run", spy)
    assert main(["run", "--beta", "100", "--out", str(tmp_path / "o")]) == 0
    assert seen["workers"] == 2


def test_emit_requires_results(tmp_path):
    with pytest.raises(ConfigError):
        emit_results([], tmp_path)
