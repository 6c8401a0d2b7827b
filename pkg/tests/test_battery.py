import math

import pytest

from toda_growth.battery import CHECKS, DEFAULT_THRESHOLDS, run_battery
from toda_growth.models import CheckResult
from toda_growth.stats import battery_passed, format_check, linear_slope, summarize_drift, summarize_numeric

FAST = ["laurent_algebra", "gauge_decomposition", "casimir_contour", "string_rank", "pencil"]


def test_fast_checks_pass():
    timings = {}
    results = run_battery(seed=3, only=FAST, timings=timings)
    assert [r.name for r in results] == FAST
    assert all(r.passed for r in results), [format_check(r) for r in results if not r.passed]
    assert set(timings) == set(FAST)


def test_override_can_fail_a_check():
    [result] = run_battery(only=["gauge_decomposition"], overrides={"gauge": 0.0})
    assert not result.passed
    assert not battery_passed([result])


def test_every_check_has_its_threshold():
    assert set(CHECKS) >= {"circle_law", "leak_boundaries", "bihamiltonian_triple", "area_growth"}
    assert all(value > 0 for value in DEFAULT_THRESHOLDS.values())


def test_format_check():
    line = format_check(CheckResult("pencil", False, 2.5e-3, 1e-10, "shifted fields"))
    assert line == "[FAIL] pencil: measured=2.500e-03 threshold=1.0e-10 (shifted fields)"


def test_summaries():
    summary = summarize_numeric([3.0, 1.0, 2.0])
    assert (summary.count, summary.median, summary.minimum, summary.maximum) == (3, 2.0, 1.0, 3.0)
    assert summarize_numeric([]).average is None
    drift = summarize_drift("Q-x", [1.0, 1.0 + 1e-3j, 1.0 - 2e-3])
    assert drift.max_drift == pytest.approx(2e-3)
    assert drift.initial == 1.0


def test_linear_slope():
    assert linear_slope([0.0, 1.0, 2.0], [1.0, 3.0 + 1j, 5.0 + 2j]) == pytest.approx(2.0 + 1j)
    assert linear_slope([1.0], [4.0]) == 0j
    assert math.isclose(abs(linear_slope([0.0, 0.5], [0.0, math.pi / 2])), math.pi)


def test_flow_checks_report_their_sweeps():
    results = {r.name: r for r in run_battery(seed=5, only=["commutators", "coalescence", "kronecker_response"])}
    assert all(r.passed for r in results.values()), [format_check(r) for r in results.values() if not r.passed]
    assert results["commutators"].detail.startswith("halving ratios")
    assert results["coalescence"].detail.count(",") == 6
