import logging

import numpy as np
import pytest
import yaml

from toda_growth.config import ENV_SETTINGS, get_settings
from toda_growth.quadrature import contour_integral, laurent_coefficients, trapezoid_contour


def use_settings(tmp_path, monkeypatch, data):
    path = tmp_path / "settings.yml"
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    monkeypatch.setenv(ENV_SETTINGS, str(path))
    return get_settings(refresh=True)


def test_simple_pole_residue():
    assert contour_integral(lambda w: 1.0 / (w - 0.5)) == pytest.approx(1.0, abs=1e-11)


def test_trapezoid_error_for_a_pole_near_the_contour():
    a = 0.99
    assert trapezoid_contour(lambda w: 1.0 / (w - a), 0.0, 1.0, 64) == pytest.approx(1.0 / (1.0 - a ** 64), rel=1e-12)


def test_node_cap_comes_from_settings(tmp_path, monkeypatch, caplog):
    use_settings(tmp_path, monkeypatch, {"quadrature": {"start_nodes": 32, "max_nodes": 128}})
    a = 0.99
    with caplog.at_level(logging.WARNING, logger="toda_growth.quadrature"):
        value = contour_integral(lambda w: 1.0 / (w - a))
    assert "node cap 128" in caplog.text
    assert value == pytest.approx(1.0 / (1.0 - a ** 128), rel=1e-12)


def test_explicit_arguments_beat_settings(tmp_path, monkeypatch):
    use_settings(tmp_path, monkeypatch, {"quadrature": {"start_nodes": 8, "max_nodes": 8}})
    a = 0.9
    assert contour_integral(lambda w: 1.0 / (w - a)) == pytest.approx(1.0 / (1.0 - a ** 8), rel=1e-12)
    assert contour_integral(lambda w: 1.0 / (w - a), cap=2 ** 12) == pytest.approx(1.0, abs=1e-11)


def test_laurent_coefficients_on_a_larger_circle():
    radius = 2.0
    m = 32
    w = radius * np.exp(2j * np.pi * np.arange(m) / m)
    values = 3.0 * w ** 2 + 0.5 / w
    coefficients = laurent_coefficients(values, radius, -1, 2)
    np.testing.assert_allclose(coefficients, [0.5, 0.0, 0.0, 3.0], atol=1e-13)
