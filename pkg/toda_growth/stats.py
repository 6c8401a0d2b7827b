"""Aggregation helpers for trajectories and check batteries."""
from __future__ import annotations

from dataclasses import asdict
from statistics import mean, median
from typing import Dict, Iterable, List, Optional, Sequence

from .models import CheckResult, DriftSummary, NumericSummary


def _safe_mean(values: List[float]) -> Optional[float]:
    return mean(values) if values else None


def _safe_median(values: List[float]) -> Optional[float]:
    return median(values) if values else None


def summarize_numeric(values: Iterable[float]) -> NumericSummary:
    data = [float(v) for v in values]
    return NumericSummary(
        count=len(data),
        average=_safe_mean(data),
        median=_safe_median(data),
        minimum=min(data) if data else None,
        maximum=max(data) if data else None,
    )


def summarize_drift(name: str, values: Sequence[complex]) -> DriftSummary:
    """Distance of every sample from the first one."""
    if not values:
        return DriftSummary(name=name, count=0, initial=None, max_drift=None, mean_drift=None)
    initial = complex(values[0])
    drift = [abs(complex(v) - initial) for v in values]
    return DriftSummary(name=name, count=len(drift), initial=initial, max_drift=max(drift), mean_drift=_safe_mean(drift))


def drift_table(series: Dict[str, Sequence[complex]]) -> List[DriftSummary]:
    return [summarize_drift(name, values) for name, values in series.items()]


def linear_slope(xs: Sequence[float], ys: Sequence[complex]) -> complex:
    """Least-squares slope of ys against xs."""
    if len(xs) < 2:
        return 0j
    x_bar = mean(xs)
    y_bar = sum(complex(y) for y in ys) / len(ys)
    num = sum((x - x_bar) * (complex(y) - y_bar) for x, y in zip(xs, ys))
    den = sum((x - x_bar) ** 2 for x in xs)
    return num / den if den else 0j


def battery_passed(results: Iterable[CheckResult]) -> bool:
    return all(r.passed for r in results)


def format_numeric_summary(label: str, summary: NumericSummary) -> str:
    data = asdict(summary)
    parts = [f"{k}={v}" for k, v in data.items()]
    return f"{label}: " + ", ".join(parts)


def format_check(result: CheckResult) -> str:
    status = "PASS" if result.passed else "FAIL"
    line = f"[{status}] {result.name}: measured={result.measured:.3e} threshold={result.threshold:.1e}"
    return f"{line} ({result.detail})" if result.detail else line
