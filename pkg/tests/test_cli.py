import json
import subprocess
import sys

import pytest

from fochlab import cli
from fochlab.diagnostics import ParityError

CRIT = "model.b=1.6666666666666667"


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = cli.main([*args, "--out", str(out)])
    return code, out


def summary(out):
    return json.loads((out / "summary.json").read_text())


class TestConfig:
    def test_defaults_echoed_completely(self, tmp_path):
        code, out = run(tmp_path, "simulate", "--set", "control.t_end=0.05")
        assert code == 0
        echo = summary(out)["config"]
        for section, keys in cli.SCHEMA.items():
            assert set(echo[section]) == set(keys)
        assert echo["control"]["t_end"] == 0.05
        assert echo["model"]["b"] == 2.0

    def test_file_then_override(self, tmp_path):
        ini = tmp_path / "run.ini"
        ini.write_text("[model]\nb = 1.0\n[control]\nt_end = 0.02\n[grid]\nn = 64\n")
        code, out = run(tmp_path, "simulate", "--config", str(ini), "--set", "grid.n=128")
        assert code == 0
        echo = summary(out)["config"]
        assert echo["model"]["b"] == 1.0 and echo["grid"]["n"] == 128

    @pytest.mark.parametrize("args", [
        ["--set", "model.bogus=1"],
        ["--set", "nosection.b=1"],
        ["--set", "model.b"],
        ["--set", "model.b=abc"],
        ["--set", "grid.n=100"],
        ["--set", "control.cfl=2"],
        ["--set", "model.alpha=0"],
        ["--set", "experiment.initial=square"],
    ])
    def test_rejected(self, tmp_path, capsys, args):
        code, _ = run(tmp_path, "simulate", *args)
        assert code == 1
        assert "config error" in capsys.readouterr().err

    def test_unknown_file_key(self, tmp_path, capsys):
        ini = tmp_path / "bad.ini"
        ini.write_text("[grid]\nwidth = 3\n")
        code, _ = run(tmp_path, "simulate", "--config", str(ini))
        assert code == 1
        assert "grid.width" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        code, _ = run(tmp_path, "simulate", "--config", str(tmp_path / "nope.ini"))
        assert code == 1

    def test_inflation_needs_critical_b(self, tmp_path):
        code, _ = run(tmp_path, "inflate2")
        assert code == 1

    def test_conservation_needs_b_range(self, tmp_path):
        code, _ = run(tmp_path, "conservation", "--set", "model.b=2")
        assert code == 1


class TestCommands:
    def test_validate(self, tmp_path):
        code, out = run(tmp_path, "validate")
        assert code == 0
        lines = (out / "validate.csv").read_text().splitlines()
        assert lines[0] == "name,value,tolerance,passed"
        assert all(line.endswith(",1") for line in lines[1:])
        assert summary(out)["headline"]["all_passed"] is True

    def test_validate_failure_exit(self, tmp_path, monkeypatch):
        import fochlab.validation as val
        monkeypatch.setattr(val, "run_validation",
                            lambda seed=0: [{"name": "x", "value": 1.0, "tolerance": 0.5, "passed": False}])
        code, _ = run(tmp_path, "validate")
        assert code == 2

    def test_simulate_constant(self, tmp_path):
        code, out = run(tmp_path, "simulate", "--set", "experiment.initial=const",
                        "--set", "experiment.amplitude=1", "--set", "model.b=2")
        assert code == 0
        head = summary(out)["headline"]
        assert head["sup_change"] < 1e-12
        assert head["termination"] == "reached_t_end"
        assert (out / "blowup_accumulator.csv").exists()

    def test_simulate_blowup_is_success(self, tmp_path):
        code, out = run(tmp_path, "simulate", "--set", "experiment.amplitude=1",
                        "--set", "control.blow_threshold=0.5")
        assert code == 0
        assert summary(out)["headline"]["termination"] == "blow_up_flag"

    def test_simulate_odd_records_riccati(self, tmp_path):
        code, out = run(tmp_path, "simulate", "--set", "experiment.initial=odd",
                        "--set", "control.t_end=0.1")
        assert code == 0
        assert (out / "riccati_ux_x0.csv").exists()

    def test_invariant_violation_exit(self, tmp_path, monkeypatch):
        def boom(cfg):
            raise ParityError("parity lost")
        monkeypatch.setattr(cli, "_dispatch", boom)
        code, _ = run(tmp_path, "simulate")
        assert code == 2

    def test_conservation(self, tmp_path):
        code, out = run(tmp_path, "conservation", "--set", "model.b=1", "--set", "grid.n=256",
                        "--set", "control.t_end=0.1")
        assert code == 0
        head = summary(out)["headline"]
        assert head["drift"] < 1e-5 and head["identity_defect"] < 1e-4
        assert (out / "momentum_L1.csv").read_text().startswith("time,value\n")

    def test_inflate2_deterministic(self, tmp_path):
        args = ["inflate2", "--set", CRIT, "--set", "experiment.N=8"]
        c1, a = run(tmp_path, *args, name="a")
        c2, b = run(tmp_path, *args, name="b")
        assert c1 == c2 == 0
        for name in ("B1.5_2_2.csv", "blowup_accumulator.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        head = summary(a)["headline"]
        assert head["growth_ratio"] >= 1.0

    def test_sweep_parallel_matches_serial(self, tmp_path, monkeypatch):
        ini = tmp_path / "sweep.ini"
        ini.write_text("[sweep]\ncommand = inflate2\nkey = experiment.N\nvalues = 8, 9\n"
                       "[model]\nb = 1.6666666666666667\n")
        monkeypatch.setenv(cli.WORKERS_ENV, "1")
        c1, serial = run(tmp_path, "sweep", "--config", str(ini), name="serial")
        monkeypatch.setenv(cli.WORKERS_ENV, "2")
        c2, par = run(tmp_path, "sweep", "--config", str(ini), name="par")
        assert c1 == c2 == 0
        assert summary(par)["headline"]["points"] == ["N=8", "N=9"]
        for point in ("N=8", "N=9"):
            assert (serial / point / "B1.5_2_2.csv").read_bytes() == (par / point / "B1.5_2_2.csv").read_bytes()

    def test_sweep_bad_key(self, tmp_path):
        code, _ = run(tmp_path, "sweep", "--set", "sweep.key=model.zzz")
        assert code == 1

    def test_module_entry_point(self, tmp_path):
        res = subprocess.run([sys.executable, "-m", "fochlab", "simulate", "--set", "bad.key=1"],
                             capture_output=True, text=True)
        assert res.returncode == 1
