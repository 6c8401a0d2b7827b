import csv
from pathlib import Path

import pytest
import yaml

from toda_growth.__main__ import main, parse_args
from toda_growth.config import get_settings
from toda_growth.models import CheckResult

SCENARIOS = Path(__file__).resolve().parents[1] / "config" / "scenarios"


def scenario(name: str) -> str:
    return str(SCENARIOS / name)


def read_csv(path: Path):
    with path.open(newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def manifest(out: Path):
    return yaml.safe_load((out / "manifest.yml").read_text(encoding="utf-8"))


def write_config(tmp_path: Path, data) -> str:
    path = tmp_path / "scenario.yml"
    path.write_text(yaml.safe_dump(data) if not isinstance(data, str) else data, encoding="utf-8")
    return str(path)


def test_parse_args_defaults():
    args = parse_args(["verify"])
    assert args.command == "verify"
    assert args.config is None and args.seed is None and args.tol is None


def test_unknown_command_is_rejected():
    with pytest.raises(SystemExit):
        parse_args(["grow"])


def test_missing_config_exits_2_with_manifest(tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", "--out", str(out)]) == 2
    data = manifest(out)
    assert data["exit_code"] == 2
    assert "--config" in data["error"]


def test_bad_yaml_exits_2(tmp_path):
    out = tmp_path / "run"
    assert main(["moments", "--config", write_config(tmp_path, "reduction: [1, 2\n"), "--out", str(out)]) == 2
    assert manifest(out)["error"].startswith("ConfigError")


def test_bad_method_names_the_field(tmp_path):
    config = write_config(tmp_path, {"reduction": {"kind": "polynomial", "r": 1.0, "u": [0.0], "real_structure": True}, "method": "euler"})
    out = tmp_path / "run"
    assert main(["simulate", "--config", config, "--out", str(out)]) == 2
    assert "method" in manifest(out)["error"]


def test_corrupted_charges_exit_2(tmp_path):
    out = tmp_path / "run"
    assert main(["moments", "--config", scenario("corrupted_charges.yml"), "--out", str(out)]) == 2
    assert manifest(out)["error"].startswith("InvalidMap")


def test_simulate_circle_writes_outputs(tmp_path):
    out = tmp_path / "circle"
    assert main(["simulate", "--config", scenario("circle.yml"), "--out", str(out)]) == 0
    data = manifest(out)
    assert data["exit_code"] == 0
    assert data["outputs"] == ["boundary.csv", "moments.csv", "residuals.csv"]
    assert data["residuals"]["max_method_distance"] < 1e-8
    assert data["residuals"]["area_slope_over_pi"] == pytest.approx(1.0, abs=1e-6)
    assert data["residuals"]["string_residual"]["count"] == 101
    residuals = read_csv(out / "residuals.csv")
    assert len(residuals) == 101
    assert float(residuals[-1]["x"]) == pytest.approx(1.0)
    assert max(float(r["string_residual"]) for r in residuals) < 1e-8
    boundary = read_csv(out / "boundary.csv")
    assert set(boundary[0]) == {"x", "phi", "re_z", "im_z"}
    moments = read_csv(out / "moments.csv")
    assert [k for k in moments[0] if k.startswith("re_")][0] == "re_Q-x"
    assert float(moments[-1]["Q"]) == pytest.approx(2.0, abs=1e-9)
    assert (out / "run.log").exists()


def test_simulate_is_deterministic(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    for out in (first, second):
        assert main(["simulate", "--config", scenario("ellipse.yml"), "--out", str(out)]) == 0
    for name in ("boundary.csv", "moments.csv", "residuals.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_moments_agree_with_contours(tmp_path):
    out = tmp_path / "moments"
    assert main(["moments", "--config", scenario("logarithmic_n1.yml"), "--out", str(out)]) == 0
    rows = read_csv(out / "moments.csv")
    assert rows[0]["name"] == "Q"
    assert {r["name"] for r in rows} >= {"I_0", "Ibar_2"}
    assert manifest(out)["residuals"]["max_moment_gap"] < 1e-8


def test_flows_record_leakage_and_actions(tmp_path):
    out = tmp_path / "flows"
    assert main(["flows", "--config", scenario("polynomial_n2.yml"), "--out", str(out)]) == 0
    leakage = read_csv(out / "leakage.csv")
    assert len(leakage) == 2 * 21
    assert max(float(r["leak_norm"]) for r in leakage) < 1e-9
    assert (out / "actions.csv").exists()


def test_refused_flow_exits_5(tmp_path):
    out = tmp_path / "refused"
    assert main(["flows", "--config", scenario("refused_flow.yml"), "--out", str(out)]) == 5
    data = manifest(out)
    assert data["error"].startswith("FormInvarianceViolated")
    leakage = read_csv(out / "leakage.csv")
    assert max(float(r["leak_norm"]) for r in leakage) > 1e-3


def test_bihamiltonian_on_a_small_grid(tmp_path):
    config = write_config(tmp_path, {"grid": {"N": 0, "m": 32, "hamiltonians": [1, 2]}})
    out = tmp_path / "bi"
    assert main(["bihamiltonian", "--config", config, "--out", str(out)]) == 0
    data = manifest(out)
    assert max(data["residuals"]["triple_agreement"].values()) < 1e-6
    assert data["residuals"]["max_bracket_defect"] < 1e-10
    assert len(read_csv(out / "flows.csv")) == 2 * 2 * 32


def test_failed_check_exits_1(tmp_path, monkeypatch):
    def failing_battery(seed, overrides=None, only=None, timings=None):
        assert seed == 11
        return [CheckResult("circle_law", True, 0.0, 1e-10), CheckResult("pencil", False, 1.0, 1e-10)]

    monkeypatch.setattr("toda_growth.runner.run_battery", failing_battery)
    out = tmp_path / "verify"
    assert main(["verify", "--seed", "11", "--out", str(out)]) == 1
    data = manifest(out)
    assert data["error"] == "failed checks: pencil"
    assert [r["passed"] for r in read_csv(out / "verify.csv")] == ["1", "0"]


def test_tol_applies_to_one_run_only(tmp_path):
    refused = tmp_path / "strict"
    assert main(["flows", "--config", scenario("polynomial_n2.yml"), "--out", str(refused), "--tol", "1e-30"]) == 5
    data = manifest(refused)
    assert data["config"]["string_tol"] == 1e-30
    assert "string equation" in data["error"]
    assert get_settings().solver["string_tol"] == 1e-8
    out = tmp_path / "default"
    assert main(["flows", "--config", scenario("polynomial_n2.yml"), "--out", str(out)]) == 0
    assert "string_tol" not in manifest(out)["config"]
