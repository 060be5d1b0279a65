import json
import subprocess
import sys

import pytest

from alhlab import scenarios
from alhlab.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_NUMERIC, EXIT_PASS, main
from alhlab.config import OUT_ENV
from alhlab.errors import BlowupError


def write_yaml(path, text):
    path.write_text(text)
    return str(path)


def test_passing_run_writes_reports(tmp_path, capsys):
    assert main(["comparison", "--out", str(tmp_path)]) == EXIT_PASS
    data = json.loads((tmp_path / "comparison.json").read_text())
    assert data["verdict"] == "pass" and data["status"] == "completed"
    assert (tmp_path / "comparison.csv").read_text().startswith("claim_id,")
    assert "claims pass -> pass" in capsys.readouterr().out


def test_failing_claim_exit_code(tmp_path):
    cfg = write_yaml(tmp_path / "c.yaml", "scenario: scalar-riccati\nprofile: {a: [1.5]}\n"
                     "params: {tolerance: 1.0e-9, lambda0: [2.0]}\n")
    assert main(["scalar-riccati", "--config", cfg, "--out", str(tmp_path)]) == EXIT_FAIL
    assert json.loads((tmp_path / "scalar-riccati.json").read_text())["verdict"] == "fail"


@pytest.mark.parametrize("argv", [
    ["comparison", "--config", "/nonexistent.yaml"],
    ["comparison", "--jobs", "0"],
    ["scalar-riccati", "--config", "WRONG"],
])
def test_configuration_errors(argv, tmp_path):
    if "WRONG" in argv:
        argv[argv.index("WRONG")] = write_yaml(tmp_path / "w.yaml", "scenario: comparison\n")
    assert main(argv + ["--out", str(tmp_path)]) == EXIT_CONFIG


def test_r_max_override_validated(tmp_path):
    assert main(["comparison", "--r-max", "1000", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_numerical_abort_writes_aborted_report(tmp_path, monkeypatch):
    def boom(cfg):
        def task():
            raise BlowupError("state left the representable range")
        return [(lambda: task(), ())]

    monkeypatch.setitem(scenarios.TASKS, "comparison", boom)
    assert main(["comparison", "--out", str(tmp_path)]) == EXIT_NUMERIC
    data = json.loads((tmp_path / "comparison.json").read_text())
    assert data["status"] == "aborted" and "BlowupError" in data["error"] and data["verdict"] == "fail"


def test_precondition_failure_exit_code(tmp_path):
    cfg = write_yaml(tmp_path / "c.yaml", "scenario: scalar-riccati\nparams: {lambda0: [-1.0]}\n")
    assert main(["scalar-riccati", "--config", cfg, "--out", str(tmp_path)]) == EXIT_NUMERIC


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    assert main(["comparison", "--quiet"]) == EXIT_PASS
    assert (tmp_path / "env" / "comparison.csv").exists()


def test_jobs_do_not_change_reports(tmp_path):
    for jobs, d in ((1, "a"), (2, "b")):
        assert main(["scalar-riccati", "--jobs", str(jobs), "--out", str(tmp_path / d), "--quiet"]) == EXIT_PASS
    assert (tmp_path / "a" / "scalar-riccati.json").read_bytes() == (tmp_path / "b" / "scalar-riccati.json").read_bytes()
    assert (tmp_path / "a" / "scalar-riccati.csv").read_bytes() == (tmp_path / "b" / "scalar-riccati.csv").read_bytes()


def test_seed_is_recorded(tmp_path):
    main(["first-derivatives", "--seed", "5", "--out", str(tmp_path), "--quiet"])
    assert json.loads((tmp_path / "first-derivatives.json").read_text())["config"]["seed"] == 5


def test_console_script_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "alhlab.cli", "comparison", "--out", str(tmp_path), "--quiet"],
                         capture_output=True, text=True)
    assert out.returncode == EXIT_PASS
    assert out.stdout.strip().startswith("comparison:")


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0 and "alhlab" in capsys.readouterr().out
