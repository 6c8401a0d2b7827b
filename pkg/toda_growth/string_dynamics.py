"""The string equation {z, zbar} = 1: tangent solve, x-evolution and Newton reconstruction."""
from __future__ import annotations

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from .config import get_settings
from .errors import CuspDetected, DegenerateConfiguration, DegenerateJacobian, InvalidMap, NoConvergence
from .laurent import LaurentSeries, lax_bracket
from .maps import MapPair, PolyMapPair, univalence_margin
from .maps.base import REAL_TOL
from .maps.geometry import unit_circle
from .models import ConservedSet, EvolutionState, MomentVector, ParamTangent
from .moments import action_count, action_I, action_Ibar, casimir_Q, moment_Mbar_k, moment_Mk, moments
from .quadrature import laurent_coefficients

logger = logging.getLogger(__name__)


def collocation_nodes(pair: MapPair, m: Optional[int] = None) -> np.ndarray:
    settings = get_settings()
    count = m or max(int(settings.solver.get("collocation_points", 64)), 4 * pair.dimension)
    return pair.collocation_radius() * np.exp(2j * np.pi * np.arange(count) / count)


def string_matrix(pair: MapPair, w: np.ndarray) -> np.ndarray:
    """Rows are sample points; column p holds w (z_w dzbar/dp - zbar_w dz/dp)."""
    z_w = pair.z_w(w)[:, None]
    zbar_w = pair.zbar_w(w)[:, None]
    return w[:, None] * (z_w * pair.zbar_grad(w) - zbar_w * pair.z_grad(w))


def solve_string_ode_rhs(pair: MapPair) -> ParamTangent:
    """The unique parameter velocity making {z, zbar} = 1."""
    settings = get_settings()
    rtol = float(settings.solver.get("degeneracy_rtol", 1e-10))
    w = collocation_nodes(pair)
    A = string_matrix(pair, w)
    U, S, Vh = np.linalg.svd(A, full_matrices=False)
    if S[-1] < rtol * S[0]:
        raise DegenerateConfiguration(
            f"string system is rank deficient (sigma_min/sigma_max = {S[-1] / S[0]:.3e})"
        )
    rhs = np.ones(w.size, dtype=np.complex128)
    values = Vh.conj().T @ ((U.conj().T @ rhs) / S)
    if pair.real_structure:
        values = pair.symmetrize(values)
    return ParamTangent(values=values, labels=pair.param_labels())


def string_rank(pair: MapPair) -> int:
    settings = get_settings()
    rtol = float(settings.solver.get("degeneracy_rtol", 1e-10))
    S = np.linalg.svd(string_matrix(pair, collocation_nodes(pair)), compute_uv=False)
    return int(np.sum(S > rtol * S[0]))


def string_residual(pair: MapPair, tangent: ParamTangent, m: int = 128) -> LaurentSeries:
    """Laurent coefficients of {z, zbar} - 1 for the given x-velocity.

    Exact for polynomial maps; otherwise the bracket is sampled on the
    collocation circle and its coefficients are read off by FFT.
    """
    values = np.asarray(tangent.values, dtype=np.complex128)
    if isinstance(pair, PolyMapPair):
        z = pair.expand_z_at_infinity(0)
        zbar = pair.expand_zbar_at_zero(0)
        bracket = lax_bracket(z, pair.expand_z_dot(values, 0), zbar, pair.expand_zbar_dot(values, 0))
        return (bracket - 1.0).trim()
    w = collocation_nodes(pair, m)
    sampled = string_matrix(pair, w) @ values - 1.0
    radius = pair.collocation_radius()
    coeffs = laurent_coefficients(sampled, radius, -(m // 2) + 1, m // 2 - 1)
    return LaurentSeries(-(m // 2) + 1, coeffs, truncated=True)


def string_residual_norm(pair: MapPair, tangent: Optional[ParamTangent] = None) -> float:
    tangent = solve_string_ode_rhs(pair) if tangent is None else tangent
    return float(np.max(np.abs(string_residual(pair, tangent).coeffs)))


def gp_residual(state: EvolutionState, m: int = 256) -> float:
    """max over the circle of |Im(z_phi conj(z_x)) - 1/2|."""
    pair = state.map
    require_shape(pair)
    w = unit_circle(m)
    tangent = solve_string_ode_rhs(pair).values
    z_phi = 1j * w * pair.z_w(w)
    z_x = pair.z_grad(w) @ tangent
    return float(np.max(np.abs(np.imag(z_phi * np.conj(z_x)) - 0.5)))


def require_shape(pair: MapPair) -> None:
    if pair.physical:
        tol = float(get_settings().solver.get("cusp_tol", 1e-6))
        margin = univalence_margin(pair, 64)
        if margin < tol:
            raise CuspDetected(f"univalence margin {margin:.3e} below {tol:.1e}")


def rk4_step(
    pair: MapPair, h: float, velocity: Callable[[MapPair], np.ndarray], real_structure: Optional[bool] = None
) -> MapPair:
    """One classical Runge-Kutta step on the parameter vector.

    With the real structure on, the combined step must already satisfy it up to roundoff.
    """
    v0 = pair.params()
    k1 = velocity(pair)
    k2 = velocity(pair.with_params(v0 + 0.5 * h * k1, real_structure))
    k3 = velocity(pair.with_params(v0 + 0.5 * h * k2, real_structure))
    k4 = velocity(pair.with_params(v0 + h * k3, real_structure))
    step = v0 + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if pair.real_structure and (real_structure is None or real_structure):
        defect = pair.symmetry_defect(step)
        if defect > REAL_TOL * max(1.0, float(np.max(np.abs(step)))):
            raise InvalidMap(f"RK4 step broke the real structure (defect {defect:.3e})")
    return pair.with_params(step, real_structure)


def evolve_x(
    state: EvolutionState, x_target: float, steps: int, progress: Optional[bool] = None
) -> List[EvolutionState]:
    """Fixed-step RK4 along the string-equation flow; returns every accepted state."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    settings = get_settings()
    show = settings.progress.get("enabled", False) if progress is None else progress
    h = (x_target - state.x) / steps
    trajectory = [state]
    current = state

    def velocity(pair: MapPair) -> np.ndarray:
        return solve_string_ode_rhs(pair).values

    for n in tqdm(range(steps), desc="evolve_x", disable=not show, leave=False):
        pair = rk4_step(current.map, h, velocity)
        x = state.x + (n + 1) * h
        require_shape(pair)
        current = EvolutionState(map=pair, x=x)
        trajectory.append(current)
    logger.debug("evolved %s from x=%.6g to x=%.6g in %d steps", current.map.kind, state.x, x_target, steps)
    return trajectory


# conserved quantities -----------------------------------------------------
def moment_count(pair: MapPair) -> int:
    if isinstance(pair, PolyMapPair):
        return pair.order + 1
    return action_count(pair)


def conserved_targets(state: EvolutionState) -> ConservedSet:
    pair = state.map
    c0 = casimir_Q(pair) - state.x
    count = moment_count(pair)
    if isinstance(pair, PolyMapPair):
        return ConservedSet(
            c0=c0,
            c=[moment_Mk(pair, k) for k in range(1, count + 1)],
            cbar=[moment_Mbar_k(pair, k) for k in range(1, count + 1)],
            kind="moments",
        )
    return ConservedSet(
        c0=c0,
        c=[action_I(pair, j) for j in range(count)],
        cbar=[action_Ibar(pair, j) for j in range(count)],
        kind="actions",
    )


def newton_reconstruct(
    targets: ConservedSet,
    x: float,
    guess: MapPair,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> MapPair:
    """Damped complex Newton on (Q - x - c0, c - c(map), cbar - cbar(map)) = 0."""
    settings = get_settings()
    tol = float(settings.solver.get("newton_tol", 1e-12)) if tol is None else tol
    max_iter = int(settings.solver.get("newton_max_iter", 50)) if max_iter is None else max_iter
    target = targets.as_vector()

    def residual(vec: np.ndarray) -> np.ndarray:
        candidate = guess.with_params(vec, real_structure=False)
        found = conserved_targets(EvolutionState(map=candidate, x=x)).as_vector()
        return found - target

    vec = guess.params()
    F = residual(vec)
    norm = float(np.linalg.norm(F))
    for iteration in range(max_iter):
        if norm < tol:
            logger.debug("newton converged after %d iterations (|F| = %.3e)", iteration, norm)
            return guess.with_params(vec)
        J = _fd_jacobian(residual, vec)
        S = np.linalg.svd(J, compute_uv=False)
        if S[-1] < 1e-13 * S[0]:
            raise DegenerateJacobian(f"Jacobian singular (sigma_min/sigma_max = {S[-1] / S[0]:.3e})")
        delta = np.linalg.lstsq(J, -F, rcond=None)[0]
        damping = 1.0
        for _ in range(12):
            trial = vec + damping * delta
            trial_F = residual(trial)
            trial_norm = float(np.linalg.norm(trial_F))
            if trial_norm < norm:
                break
            damping *= 0.5
        else:
            raise NoConvergence(f"line search failed at iteration {iteration} (|F| = {norm:.3e})")
        if damping < 1.0:
            logger.warning("newton step damped to %.3g at iteration %d", damping, iteration)
        if guess.real_structure:
            trial = guess.symmetrize(trial)
            trial_F = residual(trial)
            trial_norm = float(np.linalg.norm(trial_F))
        vec, F, norm = trial, trial_F, trial_norm
    if norm < tol:
        return guess.with_params(vec)
    raise NoConvergence(f"no convergence after {max_iter} iterations (|F| = {norm:.3e})")


def _fd_jacobian(residual: Callable[[np.ndarray], np.ndarray], vec: np.ndarray) -> np.ndarray:
    columns = []
    for j in range(vec.size):
        h = 1e-7 * max(1.0, abs(vec[j]))
        step = np.zeros_like(vec)
        step[j] = h
        columns.append((residual(vec + step) - residual(vec - step)) / (2 * h))
    return np.stack(columns, axis=1)


def moments_from_actions(targets: ConservedSet, x: float, guess: MapPair, k_max: int) -> MomentVector:
    """Harmonic moments of the map labelled by the given action variables."""
    pair = newton_reconstruct(targets, x, guess)
    return moments(pair, k_max)


def parameter_distance(a: MapPair, b: MapPair) -> float:
    return float(np.max(np.abs(a.params() - b.params())))


def ellipse_rates(r: float, alpha: float) -> Tuple[float, float]:
    """(dr/dx, du_1/dx) on the family u_1 = alpha r, u_0 fixed."""
    dr = 1.0 / (2.0 * r * (1.0 - alpha * alpha))
    return dr, alpha * dr


__all__ = [
    "conserved_targets",
    "ellipse_rates",
    "evolve_x",
    "gp_residual",
    "moments_from_actions",
    "newton_reconstruct",
    "parameter_distance",
    "require_shape",
    "rk4_step",
    "solve_string_ode_rhs",
    "string_rank",
    "string_residual",
    "string_residual_norm",
]
