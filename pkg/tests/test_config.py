import pytest
import yaml

from toda_growth.config import ENV_SETTINGS, FlowEntry, get_settings, load_run_config, overridden_settings, parse_run_config
from toda_growth.errors import ConfigError

POLY = {"kind": "polynomial", "r": 1.0, "u": [0.1], "real_structure": True}


def test_defaults_fill_missing_sections(tmp_path, monkeypatch):
    path = tmp_path / "settings.yml"
    path.write_text(yaml.safe_dump({"solver": {"string_tol": 1e-6}}), encoding="utf-8")
    monkeypatch.setenv(ENV_SETTINGS, str(path))
    settings = get_settings(refresh=True)
    assert settings.solver["string_tol"] == 1e-6
    assert settings.solver["newton_max_iter"] == 50
    assert settings.quadrature["max_nodes"] == 16384


def test_unknown_settings_section(tmp_path, monkeypatch):
    path = tmp_path / "settings.yml"
    path.write_text(yaml.safe_dump({"crawl": {}}), encoding="utf-8")
    monkeypatch.setenv(ENV_SETTINGS, str(path))
    with pytest.raises(ConfigError, match="crawl"):
        get_settings(refresh=True)


def test_missing_override_file(tmp_path, monkeypatch):
    monkeypatch.setenv(ENV_SETTINGS, str(tmp_path / "absent.yml"))
    with pytest.raises(FileNotFoundError):
        get_settings(refresh=True)


def test_complex_values_are_pairs():
    config = parse_run_config({"reduction": {**POLY, "u": [[0.1, 0.2]], "real_structure": False, "ubar": [0.3]}})
    assert config.reduction["u"] == [0.1 + 0.2j]
    assert config.reduction["ubar"] == [0.3]


@pytest.mark.parametrize(
    "raw,field",
    [
        ({}, "reduction"),
        ({"reduction": {"kind": "spiral"}}, "reduction.kind"),
        ({"reduction": {**POLY, "real_structure": False}}, "reduction.ubar"),
        ({"reduction": POLY, "steps": 0}, "steps"),
        ({"reduction": POLY, "x_range": [0.0]}, "x_range"),
        ({"reduction": POLY, "flows": [{"function": "exponential"}]}, "flows[0].function"),
        ({"reduction": POLY, "flows": [{"function": "standard", "delta": "tiny"}]}, "flows[0].delta"),
        ({"grid": {"m": 48}}, "grid.m"),
        ({"reduction": POLY, "samples": 100}, "samples"),
        ({"reduction": {"kind": "logarithmic", "branch": [{"w": [0.1, 0.0]}], "real_structure": True}}, "reduction.branch[0].a"),
    ],
)
def test_errors_name_the_field(raw, field):
    with pytest.raises(ConfigError) as info:
        parse_run_config(raw, require_reduction="grid" not in raw)
    assert info.value.field == field
    assert info.value.exit_code == 2


def test_charges_stay_strings():
    raw = {"kind": "logarithmic", "real_structure": True, "branch": [{"a": "1/10", "w": [0.3, 0.1]}, {"a": "-1/10", "w": [-0.2, 0.0]}]}
    config = parse_run_config({"reduction": raw})
    assert [a for a, _ in config.reduction["branch"]] == ["1/10", "-1/10"]


def test_grid_only_run_config():
    config = parse_run_config({"grid": {"N": 1, "m": 64, "hamiltonians": [2]}}, require_reduction=False)
    assert config.reduction == {}
    assert (config.grid.N, config.grid.m, config.grid.hamiltonians) == (1, 64, [2])


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_run_config(tmp_path / "nope.yml")


def test_flow_delta_defaults_to_settings(tmp_path, monkeypatch):
    path = tmp_path / "settings.yml"
    path.write_text(yaml.safe_dump({"flows": {"delta": 5e-4}}), encoding="utf-8")
    monkeypatch.setenv(ENV_SETTINGS, str(path))
    get_settings(refresh=True)
    config = parse_run_config({"reduction": POLY, "flows": [{"function": "standard", "index": 1}, {"function": "standard", "delta": 0.01}]})
    assert [entry.delta for entry in config.flows] == [5e-4, 0.01]
    assert FlowEntry("standard", 1).delta == 5e-4


def test_overridden_settings_are_scoped():
    base = get_settings()
    with overridden_settings(solver={"string_tol": 1e-3}) as layered:
        assert get_settings() is layered
        assert layered.solver["string_tol"] == 1e-3
        assert layered.solver["newton_max_iter"] == 50
    assert get_settings() is base
    assert base.solver["string_tol"] == 1e-8


def test_string_tolerance_in_run_config():
    assert parse_run_config({"reduction": POLY}).string_tol is None
    assert parse_run_config({"reduction": POLY, "string_tol": "1e-6"}).string_tol == 1e-6
    with pytest.raises(ConfigError) as info:
        parse_run_config({"reduction": POLY, "string_tol": "loose"})
    assert info.value.field == "string_tol"
