import json

import pytest

from alhlab.config import OUT_ENV, SCENARIOS, ScenarioConfig, default_config, from_mapping, load_config
from alhlab.errors import ConfigurationError
from alhlab.report import Claim, bound_claim, flag_claim, fmt, rate_claim, render_csv, summary, write_report


@pytest.mark.parametrize("name", SCENARIOS)
def test_packaged_configs_load(name):
    cfg = default_config(name)
    assert cfg.scenario == name and cfg.stem == name


@pytest.mark.parametrize("doc", [
    {"profile": {"a": 1.0}},
    {"scenario": "nope"},
    {"scenario": "comparison", "extra": 1},
    {"scenario": "comparison", "profile": {"a": [0.0]}},
    {"scenario": "comparison", "profile": {"J": -1}},
    {"scenario": "comparison", "grid": {"n": 9}},
    {"scenario": "comparison", "grid": {"r_max": 800}},
    {"scenario": "comparison", "fit": {"window": [10, 5]}},
    {"scenario": "comparison", "seed": -1},
    {"scenario": "comparison", "grid": {"n": "two"}},
    [1, 2],
])
def test_invalid_documents_rejected(doc):
    with pytest.raises(ConfigurationError):
        from_mapping(doc)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "missing.yaml")
    p = tmp_path / "bad.yaml"
    p.write_text("scenario: [unclosed\n")
    with pytest.raises(ConfigurationError):
        load_config(p)


def test_overrides_clip_window():
    cfg = default_config("scalar-riccati").with_overrides(seed=3, r_max=20.0, out_dir="x")
    assert cfg.seed == 3 and cfg.r_max == 20.0 and cfg.window == (5.0, 20.0)
    assert str(cfg.output_dir) == "x"


def test_output_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(OUT_ENV, str(tmp_path))
    assert ScenarioConfig("comparison").output_dir == tmp_path
    monkeypatch.delenv(OUT_ENV)
    assert str(ScenarioConfig("comparison").output_dir) == "alhlab-out"


@pytest.mark.parametrize("x,text", [(0.0, "0"), (1.5, "1.5"), (1 / 3, "0.333333"), (float("inf"), "inf"),
                                    (True, "true"), ((1, 2.5), "(1, 2.5)"), ("O(r)", "O(r)")])
def test_fmt(x, text):
    assert fmt(x) == text


def test_claim_helpers():
    assert rate_claim("x", "l", 1.0, 1.05, 0.1).passed
    assert not rate_claim("x", "l", 1.0, float("nan"), 0.1).passed
    assert bound_claim("x", "l", 0.5, 1.0).passed and not bound_claim("x", "l", 0.5, 1.0, below=False).passed
    assert flag_claim("x", "l", True, True).verdict == "pass"


def test_report_files(tmp_path):
    claims = [rate_claim("c1", "label", 2.0, 2.01, 0.1), Claim("c2", "label", "O(1)", "O(r)", "exact", False)]
    doc = summary("comparison", {"seed": 0}, claims)
    csv_path, json_path = write_report(tmp_path, "stem", claims, doc)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "claim_id,paper_anchor,predicted,measured,tolerance,verdict"
    assert lines[2].endswith(",fail")
    data = json.loads(json_path.read_text())
    assert data["claims_total"] == 2 and data["claims_passed"] == 1 and data["verdict"] == "fail"
    assert render_csv(claims) == csv_path.read_text()
