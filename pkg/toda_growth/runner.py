"""High level orchestration: one ScenarioRunner per CLI command."""
from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import asdict
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional

import numpy as np

from . import __version__
from .battery import run_battery
from .bihamiltonian import LINEAR, QUADRATIC, lax_flow, pencil_defect, poisson_flow, smeared_bracket
from .config import RunConfig, overridden_settings
from .errors import FormInvarianceViolated, SingularPoint, TodaGrowthError
from .fixtures import grid_fixture
from .flows import conserved_vector, flow_evolve, flow_rhs
from .maps import MapPair, PolyMapPair, boundary_samples, build_map, enclosed_area, univalence_margin
from .models import EvolutionFunction, EvolutionState, FlowSpec, RunManifest
from .moments import (
    action_contour,
    action_count,
    action_I,
    action_Ibar,
    casimir_contour,
    casimir_Q,
    moment_Mbar_k,
    moment_Mk,
    richardson_moments,
)
from .stats import battery_passed, drift_table, format_check, format_numeric_summary, linear_slope, summarize_numeric
from .string_dynamics import (
    conserved_targets,
    evolve_x,
    gp_residual,
    moments_from_actions,
    newton_reconstruct,
    parameter_distance,
    string_residual_norm,
)
from .utils import complex_columns, write_csv, write_manifest

logger = logging.getLogger(__name__)

MAX_SNAPSHOTS = 50


class ScenarioRunner:
    """Run one command for the provided config and always leave a manifest behind."""

    def __init__(self, command: str, config: RunConfig, out_dir: Path):
        self.command = command
        self.config = config
        self.out_dir = out_dir
        self.manifest = RunManifest(command=command, version=__version__, config=config.raw)

    def run(self) -> int:
        handler: Callable[[], None] = getattr(self, f"cmd_{self.command}")
        solver = {} if self.config.string_tol is None else {"string_tol": self.config.string_tol}
        try:
            with overridden_settings(solver=solver):
                handler()
        except TodaGrowthError as exc:
            logger.error("%s failed: %s: %s", self.command, type(exc).__name__, exc, exc_info=True)
            self.manifest.exit_code = exc.exit_code
            self.manifest.error = f"{type(exc).__name__}: {exc}"
        finally:
            write_manifest(self.manifest, self.out_dir / "manifest.yml")
        return self.manifest.exit_code

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        started = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - started
            self.manifest.phases[name] = elapsed
            logger.info("phase %s took %.3fs", name, elapsed)

    def _write(self, name: str, rows: List[Dict[str, object]], fieldnames: Optional[List[str]] = None) -> None:
        path = write_csv(rows, self.out_dir / name, fieldnames)
        self.manifest.outputs.append(path.name)

    def _map(self) -> MapPair:
        return build_map(self.config.reduction)

    # simulate -----------------------------------------------------------
    def cmd_simulate(self) -> None:
        cfg = self.config
        start = EvolutionState(self._map(), cfg.x_range[0])
        x_end = cfg.x_range[1]
        with self.phase("evolve"):
            if cfg.method in ("ode", "both"):
                trajectory = evolve_x(start, x_end, cfg.steps)
            else:
                trajectory = self._newton_trajectory(start, x_end, cfg.steps)
        distances: Optional[List[float]] = None
        if cfg.method == "both":
            with self.phase("newton"):
                newton = self._newton_trajectory(start, x_end, cfg.steps)
                distances = [parameter_distance(a.map, b.map) for a, b in zip(trajectory, newton)]
            self.manifest.residuals["max_method_distance"] = max(distances)
        with self.phase("write"):
            self._write_boundary(trajectory)
            self._write_conserved(trajectory)
            self._write_residuals(trajectory, distances)

    def _newton_trajectory(self, start: EvolutionState, x_end: float, steps: int) -> List[EvolutionState]:
        targets = conserved_targets(start)
        states = [start]
        guess = start.map
        for n in range(1, steps + 1):
            x = start.x + (x_end - start.x) * n / steps
            guess = newton_reconstruct(targets, x, guess)
            states.append(EvolutionState(guess, x))
        return states

    def _write_boundary(self, trajectory: List[EvolutionState]) -> None:
        stride = max(1, (len(trajectory) - 1) // MAX_SNAPSHOTS)
        m = self.config.samples
        phi = 2 * np.pi * np.arange(m) / m
        rows = []
        for state in trajectory[::stride]:
            try:
                z = boundary_samples(state.map, m)
            except SingularPoint as exc:
                logger.warning("no boundary at x=%.6g: %s", state.x, exc)
                continue
            rows += [{"x": state.x, "phi": p, "re_z": v.real, "im_z": v.imag} for p, v in zip(phi, z)]
        self._write("boundary.csv", rows, ["x", "phi", "re_z", "im_z"])

    def _write_conserved(self, trajectory: List[EvolutionState]) -> None:
        labels = conserved_targets(trajectory[0]).labels()
        rows, series = [], {label: [] for label in labels}
        for state in trajectory:
            values = conserved_targets(state).as_vector()
            row: Dict[str, object] = {"x": state.x, "Q": (values[0] + state.x).real}
            for label, value in zip(labels, values):
                row.update(complex_columns(label, value))
                series[label].append(value)
            rows.append(row)
        fields = ["x", "Q"] + [c for label in labels for c in (f"re_{label}", f"im_{label}")]
        self._write("moments.csv", rows, fields)
        self.manifest.drift = [asdict(d) for d in drift_table(series)]

    def _write_residuals(self, trajectory: List[EvolutionState], distances: Optional[List[float]]) -> None:
        fields = ["x", "string_residual", "gp_residual", "univalence_margin", "area"]
        if distances is not None:
            fields.append("method_distance")
        rows = []
        for n, state in enumerate(trajectory):
            pair = state.map
            row: Dict[str, object] = {"x": state.x, "string_residual": string_residual_norm(pair)}
            if pair.physical:
                row["gp_residual"] = gp_residual(state, self.config.samples)
                row["univalence_margin"] = univalence_margin(pair, max(64, self.config.samples))
                row["area"] = enclosed_area(pair, self.config.samples)
            if distances is not None:
                row["method_distance"] = distances[n]
            rows.append(row)
        self._write("residuals.csv", rows, fields)
        summary = summarize_numeric(float(r["string_residual"]) for r in rows)
        logger.info(format_numeric_summary("string residual", summary))
        self.manifest.residuals["string_residual"] = asdict(summary)
        self.manifest.residuals["max_string_residual"] = summary.maximum
        areas = [(r["x"], r["area"]) for r in rows if "area" in r]
        if len(areas) >= 2:
            slope = linear_slope([float(x) for x, _ in areas], [complex(a) for _, a in areas])
            self.manifest.residuals["area_slope_over_pi"] = slope.real / np.pi

    # flows --------------------------------------------------------------
    def cmd_flows(self) -> None:
        start = EvolutionState(self._map(), self.config.x_range[0])
        labels, _ = conserved_vector(start.map)
        leak_rows: List[Dict[str, object]] = []
        action_rows: List[Dict[str, object]] = []
        slopes: Dict[str, Dict[str, List[float]]] = {}
        violation: Optional[FormInvarianceViolated] = None
        for entry in self.config.flows:
            spec = FlowSpec(EvolutionFunction(entry.function, entry.index, entry.barred), entry.delta, entry.steps)
            label = spec.function.label
            taus: List[float] = []
            values: List[np.ndarray] = []

            def record(step: int, state: EvolutionState) -> None:
                _, report = flow_rhs(state, spec.function, require_string=False)
                leak_rows.append({"flow": label, "step": step, "leak_norm": report.leak_norm, "allowed_norm": report.allowed_norm})
                taus.append(step * spec.delta)
                values.append(conserved_vector(state.map)[1])
                row: Dict[str, object] = {"flow": label, "tau": step * spec.delta}
                for name, value in zip(labels, values[-1]):
                    row.update(complex_columns(name, value))
                action_rows.append(row)

            with self.phase(f"flow {label}"):
                try:
                    record(0, start)
                    flow_evolve(start, spec, on_step=record)
                except FormInvarianceViolated as exc:
                    logger.error("flow %s refused: %s", label, exc)
                    violation = violation or exc
                    continue
            slopes[label] = {
                name: [linear_slope(taus, [v[i] for v in values]).real]
                for i, name in enumerate(labels)
            }
        self._write("leakage.csv", leak_rows, ["flow", "step", "leak_norm", "allowed_norm"])
        fields = ["flow", "tau"] + [c for name in labels for c in (f"re_{name}", f"im_{name}")]
        self._write("actions.csv", action_rows, fields)
        self.manifest.residuals["slopes"] = {k: {n: v[0] for n, v in d.items()} for k, d in slopes.items()}
        if violation is not None:
            raise violation

    # moments ------------------------------------------------------------
    def cmd_moments(self) -> None:
        pair = self._map()
        rows: List[Dict[str, object]] = []

        def add(name: str, closed: complex, check: complex) -> None:
            rows.append({"name": name, **complex_columns("closed", closed), **complex_columns("check", check), "abs_diff": abs(closed - check)})

        with self.phase("moments"):
            add("Q", casimir_Q(pair), casimir_contour(pair))
            if isinstance(pair, PolyMapPair):
                k_max = self.config.k_max or pair.order + 1
                for k in range(1, k_max + 1):
                    add(f"M_{k}", moment_Mk(pair, k), richardson_moments(pair, k, self.config.samples))
                    add(f"Mbar_{k}", moment_Mbar_k(pair, k), richardson_moments(pair.swapped(), k, self.config.samples))
            else:
                for j in range(action_count(pair)):
                    add(f"I_{j}", action_I(pair, j), action_contour(pair, j))
                    add(f"Ibar_{j}", action_Ibar(pair, j), action_contour(pair.swapped(), j))
                x0 = self.config.x_range[0]
                k_max = self.config.k_max or 2
                rebuilt = moments_from_actions(conserved_targets(EvolutionState(pair, x0)), x0, pair, k_max)
                for k in range(1, k_max + 1):
                    add(f"M_{k}", rebuilt.M[k - 1], richardson_moments(pair, k, self.config.samples))
                    add(f"Mbar_{k}", rebuilt.Mbar[k - 1], richardson_moments(pair.swapped(), k, self.config.samples))
        fields = ["name", "re_closed", "im_closed", "re_check", "im_check", "abs_diff"]
        self._write("moments.csv", rows, fields)
        self.manifest.residuals["max_moment_gap"] = max(float(r["abs_diff"]) for r in rows)

    # verify -------------------------------------------------------------
    def cmd_verify(self) -> None:
        with self.phase("battery"):
            timings: Dict[str, float] = {}
            results = run_battery(self.config.seed, self.config.tolerances, timings=timings)
        for result in results:
            logger.info(format_check(result))
        rows = [asdict(r) for r in results]
        self._write("verify.csv", rows, ["name", "passed", "measured", "threshold", "detail"])
        self.manifest.residuals["checks"] = {r.name: {"passed": r.passed, "measured": r.measured} for r in results}
        self.manifest.phases.update({f"check {k}": v for k, v in timings.items()})
        if not battery_passed(results):
            self.manifest.exit_code = 1
            self.manifest.error = "failed checks: " + ", ".join(r.name for r in results if not r.passed)

    # bihamiltonian ------------------------------------------------------
    def cmd_bihamiltonian(self) -> None:
        g = self.config.grid
        grid = grid_fixture(g.N, g.m, g.L, g.amplitude)
        if grid.smoothness_defect() > 1e-8:
            logger.warning("grid fields are under-resolved (tail share %.3e)", grid.smoothness_defect())
        flow_rows: List[Dict[str, object]] = []
        agreement: Dict[str, float] = {}
        with self.phase("flows"):
            for i in g.hamiltonians:
                lax = lax_flow(grid, i)
                linear = poisson_flow(grid, LINEAR, LINEAR.hamiltonian_index(i))
                quadratic = poisson_flow(grid, QUADRATIC, QUADRATIC.hamiltonian_index(i))
                scale = max(lax.max_abs(), 1e-300)
                agreement[f"linear_{i}"] = (lax - linear).max_abs() / scale
                agreement[f"quadratic_{i}"] = (lax - quadratic).max_abs() / scale
                for field, rows_l, rows_p, rows_q in (("a", lax.a, linear.a, quadratic.a), ("b", lax.b, linear.b, quadratic.b)):
                    for l in range(grid.N + 1):
                        for k in range(grid.m):
                            flow_rows.append({
                                "time": i, "field": f"{field}_{l}", "node": k, "x": grid.x[k],
                                **complex_columns("lax", rows_l[l, k]),
                                **complex_columns("linear", rows_p[l, k]),
                                **complex_columns("quadratic", rows_q[l, k]),
                                "leakage": lax.leakage[k] if lax.leakage is not None else 0.0,
                            })
        bracket_rows: List[Dict[str, object]] = []
        with self.phase("brackets"):
            x = grid.x
            f = np.sin(2 * np.pi * x / grid.L) + 0.3 * np.cos(4 * np.pi * x / grid.L)
            h = np.cos(2 * np.pi * x / grid.L) + 0.2 * np.sin(6 * np.pi * x / grid.L)
            for structure in (LINEAR, QUADRATIC):
                for u in grid.keys():
                    for v in grid.keys():
                        forward = smeared_bracket(grid, structure, (u, f), (v, h))
                        backward = smeared_bracket(grid, structure, (v, h), (u, f))
                        bracket_rows.append({
                            "check": "antisymmetry", "structure": structure.kind,
                            "pair": f"{u[0]}_{u[1]},{v[0]}_{v[1]}", "defect": abs(forward + backward),
                        })
            for lam in (0.3, -0.7):
                bracket_rows.append({"check": "pencil", "structure": "quadratic", "pair": f"lambda={lam}", "defect": pencil_defect(grid, lam)})
        fields = ["time", "field", "node", "x", "re_lax", "im_lax", "re_linear", "im_linear", "re_quadratic", "im_quadratic", "leakage"]
        self._write("flows.csv", flow_rows, fields)
        self._write("brackets.csv", bracket_rows, ["check", "structure", "pair", "defect"])
        self.manifest.residuals["triple_agreement"] = agreement
        self.manifest.residuals["max_bracket_defect"] = max(float(r["defect"]) for r in bracket_rows)


def manifest_for_failure(command: str, raw: Dict[str, object], exc: TodaGrowthError) -> RunManifest:
    return RunManifest(
        command=command,
        version=__version__,
        config=raw,
        exit_code=exc.exit_code,
        error=f"{type(exc).__name__}: {exc}",
    )


__all__ = ["ScenarioRunner", "manifest_for_failure"]
