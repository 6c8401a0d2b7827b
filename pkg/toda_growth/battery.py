"""The property battery behind ``verify``: every invariant suite as one named check."""
from __future__ import annotations

import logging
import math
import time
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from . import fixtures
from .bihamiltonian import LINEAR, QUADRATIC, pencil_defect, smeared_bracket, triple_agreement
from .config import get_settings
from .errors import TodaGrowthError
from .flows import (
    allowed_functions,
    coalescence_error,
    commutator_check,
    expected_response,
    flow_rhs,
    gauge_decomposition_defect,
    response_matrix,
)
from .laurent import LaurentSeries, XLaurent, jacobi_cyclic_sum, zero_curvature_defect
from .maps import enclosed_area
from .models import CheckResult, EvolutionFunction, EvolutionState
from .moments import casimir_contour, casimir_Q
from .string_dynamics import (
    conserved_targets,
    evolve_x,
    gp_residual,
    newton_reconstruct,
    parameter_distance,
    string_rank,
)

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLDS: Dict[str, float] = {
    "circle": 1e-10,
    "ellipse": 1e-9,
    "conservation": 1e-8,
    "gp": 1e-9,
    "leak_allowed": 1e-9,
    "leak_refused": 1e-3,
    "kronecker": 1e-5,
    "commutator": 1e-4,
    "agreement": 1e-8,
    "bihamiltonian": 1e-6,
    "antisymmetry": 1e-10,
    "pencil": 1e-10,
    "algebra": 1e-10,
    "gauge": 1e-12,
    "casimir": 1e-9,
    "area": 1e-6,
}

Check = Callable[[Dict[str, float], np.random.Generator], CheckResult]

FIXTURES_PER_KIND = 20
COMMUTATOR_DELTAS = (1e-2, 5e-3, 2.5e-3)
COMMUTATOR_FLOOR = 1e-12
COALESCENCE_EPSILONS = tuple(1e-2 / 2 ** k for k in range(8))


def _below(name: str, measured: float, threshold: float, detail: str = "") -> CheckResult:
    return CheckResult(name=name, passed=bool(measured < threshold), measured=float(measured), threshold=threshold, detail=detail)


def _random_fixtures(rng: np.random.Generator, kind: str, count: int = FIXTURES_PER_KIND) -> List:
    """Physical random maps; polynomial orders cycle through N = 1..4."""
    make = fixtures.RANDOM_FIXTURES[kind]
    return [make(rng, k % 4 + 1 if kind == "polynomial" else 1) for k in range(count)]


def check_circle_law(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    trajectory = evolve_x(EvolutionState(fixtures.circle(1.0), 0.0), 3.0, 1000, progress=False)
    err = max(abs(s.map.r - math.sqrt(s.x + 1.0)) for s in trajectory)
    return _below("circle_law", err, th["circle"], "r(x) = sqrt(x + 1)")


def check_ellipse_family(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    start = EvolutionState(fixtures.ellipse(1.0, 0.3), 0.0)
    trajectory = evolve_x(start, 1.0, 200, progress=False)
    c = 1.0 - 0.09
    err = 0.0
    for s in trajectory:
        r, u1 = s.map.r.real, s.map.params()[2].real
        err = max(err, abs(u1 / r - 0.3), abs(r * r * (1 - 0.09) - s.x - c))
    return _below("ellipse_family", err, th["ellipse"], "u_1/r and r^2(1 - alpha^2) - x")


def check_conservation(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    runs = [(pair, 0.5, 500) for pair in (fixtures.polynomial_n2(), fixtures.logarithmic_n1(), fixtures.rational_n1())]
    runs += [(fixtures.random_polynomial(rng, N), 0.2, 100) for N in (1, 2, 3, 4)]
    for pair, x_end, steps in runs:
        start = EvolutionState(pair, 0.0)
        base = conserved_targets(start).as_vector()
        for state in evolve_x(start, x_end, steps, progress=False)[1:]:
            worst = max(worst, float(np.max(np.abs(conserved_targets(state).as_vector() - base))))
    return _below("conservation", worst, th["conservation"], "Q - x, moments (N <= 4) and actions")


def check_gp(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    worst = max(gp_residual(EvolutionState(f(), 0.0)) for f in (fixtures.circle, fixtures.ellipse, fixtures.polynomial_n2))
    return _below("gp_residual", worst, th["gp"], "Im(z_phi conj z_x) = 1/2")


def check_rank(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    cases = [(fixtures.polynomial_n2(), 7), (fixtures.rational_n1(), 7), (fixtures.logarithmic_n1(), 7)]
    cases += [(pair, pair.dimension) for kind in fixtures.RANDOM_FIXTURES for pair in _random_fixtures(rng, kind)]
    misses = sum(string_rank(pair) != expected for pair, expected in cases)
    return CheckResult("string_rank", misses == 0, float(misses), 0.5, "2N+3 / 4n+3 / 2n+5")


def check_leak_boundaries(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    poly = EvolutionState(fixtures.formal_polynomial_n2(), 0.0)
    rational = EvolutionState(fixtures.formal_rational_n1(), 0.0)
    allowed = [(poly, EvolutionFunction("standard", k, b)) for k in (1, 2, 3) for b in (False, True)]
    allowed += [(rational, fn) for fn in allowed_functions(rational.map)]
    worst_allowed = max(flow_rhs(state, fn)[1].leak_norm for state, fn in allowed)
    refused = [(poly, EvolutionFunction("standard", 4)), (rational, EvolutionFunction("standard", 2))]
    least_refused = min(flow_rhs(state, fn)[1].leak_norm for state, fn in refused)
    passed = worst_allowed < th["leak_allowed"] and least_refused > th["leak_refused"]
    return CheckResult(
        "leak_boundaries", passed, worst_allowed, th["leak_allowed"], f"smallest refused leak {least_refused:.3e}"
    )


def check_kronecker(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for pair, count in ((fixtures.logarithmic_n1(), 3), (fixtures.polynomial_n2(), 3), (fixtures.rational_n1(), 3)):
        state = EvolutionState(pair, 0.0)
        matrix = response_matrix(state, allowed_functions(pair))
        worst = max(worst, float(np.max(np.abs(matrix - expected_response(count)))))
    return _below("kronecker_response", worst, th["kronecker"], "d(M, I)/dt = +1, d(Mbar, Ibar)/dtbar = -1")


def check_commutators(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    pairs: List[Tuple[EvolutionState, EvolutionFunction, EvolutionFunction]] = [
        (
            EvolutionState(fixtures.logarithmic_n1(), 0.0),
            EvolutionFunction("logarithmic", 0),
            EvolutionFunction("logarithmic", 1, True),
        ),
        (
            EvolutionState(fixtures.polynomial_n2(), 0.0),
            EvolutionFunction("standard", 1),
            EvolutionFunction("standard", 2, True),
        ),
    ]
    worst = 0.0
    ratios: List[float] = []
    decays = True
    for state, a, b in pairs:
        defects = [commutator_check(state, a, b, delta) for delta in COMMUTATOR_DELTAS]
        worst = max(worst, defects[0])
        for coarse, fine in zip(defects, defects[1:]):
            if fine < COMMUTATOR_FLOOR:
                continue
            ratios.append(coarse / fine)
            decays = decays and ratios[-1] >= 1.8
    detail = "halving ratios " + (", ".join(f"{q:.2f}" for q in ratios) or "at roundoff")
    return CheckResult("commutators", bool(worst < th["commutator"] and decays), worst, th["commutator"], detail)


def check_coalescence(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    pair = fixtures.rational_n1()
    w = np.array([1.5 + 1.5j, -1.2 + 1.8j])
    errors = [coalescence_error(pair, 1, eps, w) for eps in COALESCENCE_EPSILONS]
    ratios = [errors[i] / errors[i + 1] for i in range(len(errors) - 1)]
    passed = all(1.7 <= q <= 2.3 for q in ratios)
    return CheckResult("coalescence", passed, min(ratios), 1.7, "error ratios " + ", ".join(f"{q:.3f}" for q in ratios))


def check_method_agreement(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for kind in fixtures.RANDOM_FIXTURES:
        for pair in _random_fixtures(rng, kind):
            start = EvolutionState(pair, 0.0)
            ode = evolve_x(start, 0.1, 20, progress=False)[-1]
            newton = newton_reconstruct(conserved_targets(start), 0.1, start.map)
            worst = max(worst, parameter_distance(ode.map, newton))
    return _below("method_agreement", worst, th["agreement"], f"RK4 vs Newton at x = 0.1, {FIXTURES_PER_KIND} maps per kind")


def check_bihamiltonian(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    leak = 0.0
    for N in (0, 1):
        grid = fixtures.grid_fixture(N, 256)
        for i in (1, 2):
            lin, qua, lax_leak = triple_agreement(grid, i)
            worst = max(worst, lin, qua)
            leak = max(leak, lax_leak)
    return _below("bihamiltonian_triple", worst, th["bihamiltonian"], f"max Lax leakage {leak:.3e}")


def check_antisymmetry(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for N in (0, 1):
        grid = fixtures.grid_fixture(N, 128)
        x = grid.x
        keys = grid.keys()
        for structure in (LINEAR, QUADRATIC):
            for _ in range(4):
                u, v = keys[int(rng.integers(len(keys)))], keys[int(rng.integers(len(keys)))]
                f = np.sin(x + rng.uniform(0, 2 * np.pi)) + 0.3 * np.cos(2 * x)
                g = np.cos(x + rng.uniform(0, 2 * np.pi)) + 0.2 * np.sin(3 * x)
                forward = smeared_bracket(grid, structure, (u, f), (v, g))
                backward = smeared_bracket(grid, structure, (v, g), (u, f))
                worst = max(worst, abs(forward + backward))
    return _below("smeared_antisymmetry", worst, th["antisymmetry"])


def check_pencil(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    worst = max(pencil_defect(fixtures.grid_fixture(N, 128), lam) for N in (0, 1) for lam in (0.3, -0.7))
    return _below("pencil", worst, th["pencil"], "lambda = 0.3, -0.7")


def check_algebra(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    def random_x() -> XLaurent:
        return XLaurent([LaurentSeries(-2, rng.normal(size=5) + 1j * rng.normal(size=5)) for _ in range(3)])

    jacobi = jacobi_cyclic_sum(random_x(), random_x(), random_x()).norm()
    z = XLaurent(
        [
            LaurentSeries(-2, [0.3, 0.2 - 0.1j, 0.5, 1.0]),
            LaurentSeries(-2, [0.1j, 0.05, 0.2, 0.0]),
            LaurentSeries(-2, [0.02, 0.0, 0.1, 0.0]),
        ]
    )
    curvature = max(zero_curvature_defect(z, i, j) for i, j in ((1, 2), (1, 3), (2, 3)))
    return _below("laurent_algebra", max(jacobi, curvature), th["algebra"], "Jacobi and zero curvature")


def check_gauge(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    return _below("gauge_decomposition", gauge_decomposition_defect(fixtures.logarithmic_n1()), th["gauge"])


def check_casimir(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    pairs = (fixtures.polynomial_n2(), fixtures.logarithmic_n1(), fixtures.rational_n1())
    worst = max(abs(casimir_Q(pair) - casimir_contour(pair)) for pair in pairs)
    return _below("casimir_contour", worst, th["casimir"], "closed form vs contour")


def check_area(th: Dict[str, float], rng: np.random.Generator) -> CheckResult:
    trajectory = evolve_x(EvolutionState(fixtures.ellipse(1.0, 0.3), 0.0), 1.0, 100, progress=False)
    slope = (enclosed_area(trajectory[-1].map) - enclosed_area(trajectory[0].map)) / 1.0
    return _below("area_growth", abs(slope - np.pi), th["area"], "d(area)/dx = pi")


CHECKS: Dict[str, Check] = {
    "circle_law": check_circle_law,
    "ellipse_family": check_ellipse_family,
    "conservation": check_conservation,
    "gp_residual": check_gp,
    "string_rank": check_rank,
    "leak_boundaries": check_leak_boundaries,
    "kronecker_response": check_kronecker,
    "commutators": check_commutators,
    "coalescence": check_coalescence,
    "method_agreement": check_method_agreement,
    "bihamiltonian_triple": check_bihamiltonian,
    "smeared_antisymmetry": check_antisymmetry,
    "pencil": check_pencil,
    "laurent_algebra": check_algebra,
    "gauge_decomposition": check_gauge,
    "casimir_contour": check_casimir,
    "area_growth": check_area,
}


def run_battery(
    seed: int = 0,
    overrides: Optional[Dict[str, float]] = None,
    only: Optional[List[str]] = None,
    timings: Optional[Dict[str, float]] = None,
) -> List[CheckResult]:
    """Run every check (or those named in ``only``); failures become failed results, never exceptions."""
    thresholds = {**DEFAULT_THRESHOLDS, **(overrides or {})}
    rng = np.random.default_rng(seed)
    names = only or list(CHECKS)
    show = bool(get_settings().progress.get("enabled", False))
    results: List[CheckResult] = []
    for name in tqdm(names, desc="verify", disable=not show):
        started = time.perf_counter()
        try:
            result = CHECKS[name](thresholds, rng)
        except TodaGrowthError as exc:
            logger.error("check %s raised %s: %s", name, type(exc).__name__, exc)
            result = CheckResult(name, False, float("nan"), float("nan"), f"{type(exc).__name__}: {exc}")
        elapsed = time.perf_counter() - started
        if timings is not None:
            timings[name] = elapsed
        logger.info("%s: %s (%.2fs)", name, "pass" if result.passed else "FAIL", elapsed)
        results.append(result)
    return results
