"""Config validation, report round-trips, determinism, CLI surface."""

import json
import subprocess
import sys

import pytest

from theta_secant.cli import main, run_scenario
from theta_secant.errors import ConfigError
from theta_secant.reports import CheckRecord, Report, ScenarioConfig


class TestConfig:
    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError):
            ScenarioConfig.from_dict({"scenario": "bdhe", "bogus": 1})

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ConfigError):
            ScenarioConfig.from_dict({"scenario": "nope"})

    def test_tolerance_range(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(scenario="bdhe", tolerances={"x": 0.5})
        with pytest.raises(ConfigError):
            ScenarioConfig(scenario="bdhe", tolerances={"x": 1e-18})
        cfg = ScenarioConfig(scenario="bdhe", tolerances={"x": "1e-6"})
        assert cfg.tolerances["x"] == 1e-6


class TestReport:
    def test_round_trip(self):
        rep = Report("bdhe", 7, [CheckRecord.le("a", 1e-9, 1e-8),
                                 CheckRecord.ge("b", 0.5, 1e-2)],
                     curve="x5m1", environment={"version": "0.1.0", "seed": 7})
        back = Report.from_dict(json.loads(rep.to_json()))
        assert back.to_json() == rep.to_json()
        assert back.passed

    def test_overall_pass_is_conjunction(self):
        rep = Report("bdhe", 7, [CheckRecord.le("a", 1.0, 1e-8)])
        assert not rep.passed


class TestDeterminism:
    def test_reports_byte_identical_modulo_timing(self):
        cfg = ScenarioConfig(scenario="theta-selftest", seed=11,
                             window={"samples": 40})
        a = run_scenario(cfg).to_dict()
        b = run_scenario(ScenarioConfig(scenario="theta-selftest", seed=11,
                                        window={"samples": 40})).to_dict()
        a.pop("timing"), b.pop("timing")
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


class TestMain:
    def test_selftest_exit_zero(self, capsys):
        rc = main(["theta-selftest", "--seed", "3", "--window", "samples=30"])
        out = json.loads(capsys.readouterr().out)
        assert rc == 0 and out["pass"] is True

    def test_check_alias(self, capsys):
        rc = main(["check", "theta-selftest", "--seed", "3",
                   "--window", "samples=30"])
        assert rc == 0
        capsys.readouterr()

    def test_corpus_hash_reference(self, capsys):
        rc = main(["check", "bdhe", "--curve", "corpus#x5m1", "--seed", "7",
                   "--window", "m_size=4", "--window", "n_size=4"])
        out = json.loads(capsys.readouterr().out)
        assert rc == 0 and out["curve"] == "x5m1"
        fit = [c for c in out["checks"] if c["name"] == "fit_residual"][0]
        assert fit["residual"] <= 1e-8

    def test_invalid_curve_validation_exit(self, capsys, tmp_path):
        corpus = tmp_path / "bad.json"
        corpus.write_text('[{"id": "flat", "kind": "genus1", "tau": [1.0, 0.0]}]')
        rc = main(["bdhe", "--curve", f"{corpus}#flat"])
        out = json.loads(capsys.readouterr().out)
        assert rc == 2
        assert out["error"] == "ValidationError"
        assert "Im tau > 0" in out["message"]

    def test_unknown_curve_exit(self, capsys):
        rc = main(["bdhe", "--curve", "nosuch"])
        out = json.loads(capsys.readouterr().out)
        assert rc == 2 and out["error"] == "ConfigError"

    def test_bad_tol_exit(self, capsys):
        rc = main(["bdhe", "--tol", "fit_residual=0.9"])
        out = json.loads(capsys.readouterr().out)
        assert rc == 2 and out["error"] == "ConfigError"

    def test_out_file(self, tmp_path, capsys):
        out = tmp_path / "rep.json"
        rc = main(["theta-selftest", "--seed", "3", "--window", "samples=30",
                   "--out", str(out)])
        capsys.readouterr()
        assert rc == 0
        assert json.loads(out.read_text())["scenario"] == "theta-selftest"

    def test_numerical_error_exit_three(self, capsys, monkeypatch):
        # an absurdly low radius cap forces RadiusCap inside the pipeline
        monkeypatch.setenv("THETA_SECANT_CAP", "2")
        rc = main(["theta-selftest", "--seed", "3", "--window", "samples=10"])
        out = json.loads(capsys.readouterr().out)
        assert rc == 3 and out["error"] == "RadiusCap"

    def test_rs_simulate_free_particle(self, tmp_path, capsys):
        csv_path = tmp_path / "traj.csv"
        rc = main(["rs", "simulate", "--n", "1", "--t-end", "1", "--h", "1e-3",
                   "--csv", str(csv_path)])
        out = json.loads(capsys.readouterr().out)
        assert rc == 0
        assert out["checks"][0]["name"] == "free_particle_linear"
        assert out["checks"][0]["residual"] <= 1e-12
        assert csv_path.exists()
        assert len(csv_path.read_text().splitlines()) == 1002


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "theta_secant.cli", "theta-selftest",
         "--seed", "4", "--window", "samples=20"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["pass"] is True
