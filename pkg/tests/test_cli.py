"""End-to-end pipeline driver: artifacts, caching, exit codes."""

import json

import pytest

from hjholonomic.cli import main

CONFIG = {
    "hamiltonian": "-2*p1*sin(x1) + 2*x2*p2 - a*p2^2 + b*x1^4",
    "n": 2,
    "parameters": {"a": "1", "b": "1"},
    "base_point": ["pi/6", "1", "b*(pi/6)^4", "2/a"],
    "seed": 0,
}


def _write_config(tmp_path, extra=None):
    cfg = dict(CONFIG)
    cfg["output"] = str(tmp_path / "artifacts")
    cfg.update(extra or {})
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


@pytest.fixture(scope="module")
def ran(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    cfg = _write_config(tmp)
    code = main(["run-all", "--config", str(cfg)])
    return tmp, cfg, code


def test_run_all_succeeds(ran):
    tmp, cfg, code = ran
    assert code == 0
    out = tmp / "artifacts"
    for stage in ("annihilate", "pfaffian", "gamma", "solve", "verify"):
        assert (out / ("%s.json" % stage)).exists()
    assert (out / "verify.csv").exists()


def test_artifact_contents(ran):
    tmp, _, _ = ran
    out = tmp / "artifacts"
    ann = json.loads((out / "annihilate.json").read_text())
    assert ann["payload"]["dim"] == 5
    gam = json.loads((out / "gamma.json").read_text())
    assert gam["payload"]["t"] == 3
    ver = json.loads((out / "verify.json").read_text())
    assert ver["pass"] is True
    assert ver["failures"] == []


def test_rerun_uses_cache_and_force_is_deterministic(ran, capsys):
    tmp, cfg, _ = ran
    out = tmp / "artifacts"
    before = (out / "gamma.json").read_bytes()
    assert main(["gamma", "--config", str(cfg)]) == 0
    assert "up to date" in capsys.readouterr().out
    assert main(["gamma", "--config", str(cfg), "--force"]) == 0
    assert (out / "gamma.json").read_bytes() == before


def test_bad_expression_exits_2(tmp_path):
    cfg = _write_config(tmp_path, {"hamiltonian": "x1 +* sin("})
    assert main(["annihilate", "--config", str(cfg)]) == 2
    err = json.loads((tmp_path / "artifacts" / "error.json").read_text())
    assert err["error"]["type"] == "HamSyntaxError"


def test_missing_config_exits_2(tmp_path):
    assert main(["run-all", "--config", str(tmp_path / "nope.json")]) == 2


def test_budget_exhaustion_exits_3(tmp_path):
    cfg = _write_config(tmp_path, {"budgets": {"level_cap": 0}})
    assert main(["run-all", "--config", str(cfg)]) == 3


def test_singular_base_point_exits_2(tmp_path):
    cfg = _write_config(tmp_path, {"base_point": ["0", "1", "0", "2"]})
    assert main(["solve", "--config", str(cfg)]) == 2
