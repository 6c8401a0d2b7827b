"""Evolution functions of the Toda hierarchy and their flows on reduced maps.

Every evolution function is held in closed form as a ``FunctionPayload``
(Laurent part, simple and double poles, logarithms, constant) in either
v = w (unbarred) or v = 1/w (barred).  Its x-derivative is a payload of the
same shape, built from the string-equation tangent, so {H, z} is evaluated
without numerical differentiation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Literal, Optional, Sequence, Tuple

import numpy as np

from .config import get_settings
from .errors import DegenerateConfiguration, FormInvarianceViolated, IndexRangeViolation
from .laurent import LaurentSeries, XLaurent, hamiltonian_projection, power_at_infinity, zero_curvature_defect
from .maps import LogMapPair, MapPair, RationalMapPair, coalesce
from .maps.base import Half
from .models import EvolutionFunction, EvolutionState, FlowSpec, LeakageReport, ParamTangent
from .quadrature import laurent_coefficients
from .string_dynamics import (
    collocation_nodes,
    conserved_targets,
    parameter_distance,
    require_shape,
    rk4_step,
    solve_string_ode_rhs,
    string_residual_norm,
)

logger = logging.getLogger(__name__)

Variable = Literal["w", "y"]


@dataclass(frozen=True)
class FunctionPayload:
    """laurent(v) + sum c/(v - p)**order + sum a log(p - v) + constant, with v = w or 1/w."""

    variable: Variable
    laurent: LaurentSeries
    poles: Tuple[Tuple[complex, complex, int], ...] = ()
    logs: Tuple[Tuple[complex, complex], ...] = ()
    constant: complex = 0j

    def _v(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=np.complex128)
        return w if self.variable == "w" else 1.0 / w

    def value(self, w: np.ndarray) -> np.ndarray:
        v = self._v(w)
        out = np.asarray(self.laurent.evaluate(v), dtype=np.complex128) + self.constant
        for c, p, order in self.poles:
            out = out + c / (v - p) ** order
        for a, p in self.logs:
            out = out + a * np.log(p - v)
        return out

    def dv(self, w: np.ndarray) -> np.ndarray:
        v = self._v(w)
        out = np.asarray(self.laurent.deriv_w().evaluate(v), dtype=np.complex128) + 0j * v
        for c, p, order in self.poles:
            out = out - order * c / (v - p) ** (order + 1)
        for a, p in self.logs:
            out = out - a / (p - v)
        return out

    def dw(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=np.complex128)
        if self.variable == "w":
            return self.dv(w)
        return -self.dv(w) / w ** 2


# builders -----------------------------------------------------------------
def _side(pair: MapPair, barred: bool, tangent: Optional[np.ndarray]):
    half = pair.zbar_half if barred else pair.z_half
    variable: Variable = "y" if barred else "w"
    if tangent is None:
        return half, variable, None, None
    dr, own_z, own_b = pair.split(tangent)
    return half, variable, dr, (own_b if barred else own_z)


def _standard(half: Half, k: int, variable: Variable, dr, own_dot) -> Tuple[FunctionPayload, Optional[FunctionPayload]]:
    if k < 1:
        raise IndexRangeViolation("standard evolution functions start at k = 1")
    E = half.expansion(k + 1)
    fn = FunctionPayload(variable, hamiltonian_projection(power_at_infinity(E, k, k)).trim())
    if dr is None:
        return fn, None
    E_dot = half.expansion_dot(dr, own_dot, k + 1)
    power_dot = power_at_infinity(E, k - 1, k) * E_dot * k
    return fn, FunctionPayload(variable, hamiltonian_projection(power_dot).trim())


def _linear(half: Half, u: complex, variable: Variable, dr, du) -> Tuple[FunctionPayload, Optional[FunctionPayload]]:
    """r v + u/2, the zeroth function of every reduction."""
    fn = FunctionPayload(variable, LaurentSeries(0, [0.5 * u, half.r]))
    if dr is None:
        return fn, None
    return fn, FunctionPayload(variable, LaurentSeries(0, [0.5 * du, dr]))


def _log_point(half: Half, p: complex, variable: Variable, dr, dp) -> Tuple[FunctionPayload, Optional[FunctionPayload]]:
    """log(p - v) + 1/2 log(r/p)."""
    fn = FunctionPayload(variable, LaurentSeries.zero(), logs=((1.0, p),), constant=0.5 * np.log(half.r / p))
    if dr is None:
        return fn, None
    dot = FunctionPayload(
        variable,
        LaurentSeries.zero(),
        poles=((-dp, p, 1),),
        constant=0.5 * (dr / half.r - dp / p),
    )
    return fn, dot


def _pole(half: Half, c: complex, p: complex, variable: Variable, dc, dp) -> Tuple[FunctionPayload, Optional[FunctionPayload]]:
    """c/(v - p) + c/(2p)."""
    fn = FunctionPayload(variable, LaurentSeries.zero(), poles=((c, p, 1),), constant=0.5 * c / p)
    if dc is None:
        return fn, None
    dot = FunctionPayload(
        variable,
        LaurentSeries.zero(),
        poles=((dc, p, 1), (c * dp, p, 2)),
        constant=0.5 * (dc / p - c * dp / p ** 2),
    )
    return fn, dot


def _realize(
    pair: MapPair, fn: EvolutionFunction, tangent: Optional[np.ndarray]
) -> Tuple[FunctionPayload, Optional[FunctionPayload]]:
    half, variable, dr, own_dot = _side(pair, fn.barred, tangent)
    j = fn.index
    if fn.kind == "standard":
        return _standard(half, j, variable, dr, own_dot)
    if fn.kind == "logarithmic":
        if not isinstance(pair, LogMapPair):
            raise IndexRangeViolation("logarithmic evolution functions need a logarithmic map")
        if j < 0 or j > pair.n + 1:
            raise IndexRangeViolation(f"logarithmic index {j} outside 0..{pair.n + 1}")
        if j == 0:
            return _linear(half, half.u, variable, dr, None if own_dot is None else own_dot[0])  # type: ignore[attr-defined]
        return _log_point(half, half.p[j - 1], variable, dr, None if own_dot is None else own_dot[j])  # type: ignore[attr-defined]
    if fn.kind == "rational_krichever":
        if not isinstance(pair, RationalMapPair):
            raise IndexRangeViolation("Krichever evolution functions need a rational map")
        if j < 0 or j > 2 * pair.n_poles:
            raise IndexRangeViolation(f"Krichever index {j} outside 0..{2 * pair.n_poles}")
        if j == 0:
            return _linear(half, half.u0, variable, dr, None if own_dot is None else own_dot[0])  # type: ignore[attr-defined]
        i = (j + 1) // 2 - 1
        c, p = half.c[i], half.p[i]  # type: ignore[attr-defined]
        dc = dp = None
        if own_dot is not None:
            dc, dp = own_dot[1 + 2 * i], own_dot[2 + 2 * i]
        if j % 2:
            return _pole(half, c, p, variable, dc, dp)
        return _log_point(half, p, variable, dr, dp)
    raise IndexRangeViolation(f"unknown evolution function kind {fn.kind!r}")


def build_Hk(pair: MapPair, k: int, barred: bool = False) -> FunctionPayload:
    """(z^k)_+ + 1/2 (z^k)_0, or the mirror in 1/w for the barred side."""
    return _realize(pair, EvolutionFunction("standard", k, barred), None)[0]


def build_log_H(pair: LogMapPair, j: int, barred: bool = False) -> FunctionPayload:
    return _realize(pair, EvolutionFunction("logarithmic", j, barred), None)[0]


def build_rational_h(pair: RationalMapPair, j: int, barred: bool = False) -> FunctionPayload:
    return _realize(pair, EvolutionFunction("rational_krichever", j, barred), None)[0]


def payload_dot(pair: MapPair, fn: EvolutionFunction, tangent: np.ndarray) -> FunctionPayload:
    """x-derivative of the evolution function along a parameter velocity."""
    dot = _realize(pair, fn, np.asarray(tangent, dtype=np.complex128))[1]
    assert dot is not None
    return dot


def allowed_functions(pair: MapPair) -> List[EvolutionFunction]:
    """Every evolution function whose flow keeps this reduction's form."""
    out: List[EvolutionFunction] = []
    for barred in (False, True):
        if isinstance(pair, LogMapPair):
            out += [EvolutionFunction("logarithmic", j, barred) for j in range(pair.n + 2)]
        elif isinstance(pair, RationalMapPair):
            out += [EvolutionFunction("rational_krichever", j, barred) for j in range(2 * pair.n_poles + 1)]
        else:
            out += [EvolutionFunction("standard", k, barred) for k in range(1, pair.order + 2)]  # type: ignore[attr-defined]
    return out


# flows --------------------------------------------------------------------
def flow_rhs(
    state: EvolutionState,
    fn: EvolutionFunction,
    tangent: Optional[np.ndarray] = None,
    require_string: bool = True,
) -> Tuple[ParamTangent, LeakageReport]:
    """Parameter velocity of dz/dt = {H, z}, dzbar/dt = {H, zbar}, and what the ansatz cannot absorb.

    ``tangent`` overrides the x-velocity of the parameters; by default it is the
    string-equation tangent.
    """
    pair = state.map
    settings = get_settings()
    if tangent is None:
        tangent = solve_string_ode_rhs(pair).values
        if require_string:
            residual = string_residual_norm(pair, ParamTangent(tangent))
            tol = float(settings.solver.get("string_tol", 1e-8))
            if residual > tol:
                raise FormInvarianceViolated(f"string equation residual {residual:.3e} above {tol:.1e}", residual)
    tangent = np.asarray(tangent, dtype=np.complex128)
    H, H_x = _realize(pair, fn, tangent)
    assert H_x is not None

    w = collocation_nodes(pair, max(int(settings.solver.get("collocation_points", 64)), 8 * pair.dimension))
    H_w, H_xv = H.dw(w), H_x.value(w)
    z_grad, zbar_grad = pair.z_grad(w), pair.zbar_grad(w)
    dz = w * (H_w * (z_grad @ tangent) - H_xv * pair.z_w(w))
    dzbar = w * (H_w * (zbar_grad @ tangent) - H_xv * pair.zbar_w(w))

    A = np.vstack([z_grad, zbar_grad])
    b = np.concatenate([dz, dzbar])
    S = np.linalg.svd(A, compute_uv=False)
    rtol = float(settings.solver.get("degeneracy_rtol", 1e-10))
    if S[-1] < rtol * S[0]:
        raise DegenerateConfiguration(f"ansatz tangent map is rank deficient (sigma ratio {S[-1] / S[0]:.3e})")
    velocity = np.linalg.lstsq(A, b, rcond=None)[0]
    fitted = A @ velocity
    residual = b - fitted
    size = np.sqrt(b.size)
    m = w.size
    z_leak = laurent_coefficients(residual[:m], pair.collocation_radius(), -(m // 2) + 1, m // 2 - 1)
    floor = 1e-12 * max(1.0, float(np.max(np.abs(b))))
    breakdown = {
        exponent: float(abs(c)) for exponent, c in zip(range(-(m // 2) + 1, m // 2), z_leak) if abs(c) > floor
    }
    report = LeakageReport(
        allowed_norm=float(np.linalg.norm(fitted) / size),
        leak_norm=float(np.linalg.norm(residual) / size),
        breakdown=breakdown,
    )
    return ParamTangent(values=velocity, labels=pair.param_labels()), report


def refusal(fn: EvolutionFunction, pair: MapPair, report: LeakageReport, leak_violation: float) -> FormInvarianceViolated:
    """Error for a flow whose leak passed ``leak_tol``, naming the worst Laurent exponents.

    Leaks under ``leak_violation`` are reported as marginal.
    """
    worst = sorted(report.breakdown.items(), key=lambda item: -item[1])[:3]
    terms = ", ".join(f"w^{k} {v:.1e}" for k, v in worst) or "no single exponent"
    if report.leak_norm < leak_violation:
        logger.warning("%s: marginal leak %.3e under %.1e", fn.label, report.leak_norm, leak_violation)
        verdict = "marginal leak"
    else:
        verdict = "leak"
    return FormInvarianceViolated(
        f"{fn.label} leaves the {pair.kind} ansatz ({verdict} {report.leak_norm:.3e}; {terms})", report.leak_norm
    )


def flow_evolve(
    state: EvolutionState,
    spec: FlowSpec,
    on_step: Optional[Callable[[int, EvolutionState], None]] = None,
) -> EvolutionState:
    """RK4 in flow time; x stays fixed, the real structure is not imposed."""
    settings = get_settings()
    leak_tol = float(settings.flows.get("leak_tol", 1e-9))
    leak_violation = float(settings.flows.get("leak_violation", 1e-3))
    string_tol = float(settings.solver.get("string_tol", 1e-8))

    def velocity(pair: MapPair) -> np.ndarray:
        tangent, report = flow_rhs(EvolutionState(map=pair, x=state.x), spec.function, require_string=False)
        if report.leak_norm > leak_tol:
            raise refusal(spec.function, pair, report, leak_violation)
        return tangent.values

    flow_rhs(state, spec.function)
    current = state.map
    for n in range(spec.steps):
        current = rk4_step(current, spec.delta, velocity, real_structure=False)
        residual = string_residual_norm(current)
        if residual > string_tol:
            raise FormInvarianceViolated(
                f"string equation drifted to {residual:.3e} under {spec.function.label}", residual
            )
        require_shape(current)
        if on_step is not None:
            on_step(n + 1, EvolutionState(map=current, x=state.x))
    logger.debug("%s: %d steps of %.3g", spec.function.label, spec.steps, spec.delta)
    return EvolutionState(map=current, x=state.x)


def commutator_check(state: EvolutionState, fn_a: EvolutionFunction, fn_b: EvolutionFunction, delta: float) -> float:
    """|Phi_a Phi_b - Phi_b Phi_a| / delta**2 for single RK4 steps of size delta."""
    if fn_a == fn_b:
        return 0.0
    a, b = FlowSpec(fn_a, delta, 1), FlowSpec(fn_b, delta, 1)
    ab = flow_evolve(flow_evolve(state, b), a)
    ba = flow_evolve(flow_evolve(state, a), b)
    return parameter_distance(ab.map, ba.map) / delta ** 2


# diagnostics --------------------------------------------------------------
def conserved_vector(pair: MapPair) -> Tuple[List[str], np.ndarray]:
    """(Q, M or I, Mbar or Ibar) with their labels."""
    found = conserved_targets(EvolutionState(map=pair, x=0.0))
    labels = ["Q", *found.labels()[1:]]
    return labels, found.as_vector()


def response_matrix(
    state: EvolutionState,
    functions: Sequence[EvolutionFunction],
    quantity: Callable[[MapPair], np.ndarray] = lambda pair: conserved_vector(pair)[1],
    h: float = 1e-5,
) -> np.ndarray:
    """Central-difference derivative of ``quantity`` along each flow; one column per function."""
    pair = state.map
    vec = pair.params()
    columns = []
    for fn in functions:
        velocity = flow_rhs(state, fn)[0].values
        plus = quantity(pair.with_params(vec + h * velocity, real_structure=False))
        minus = quantity(pair.with_params(vec - h * velocity, real_structure=False))
        columns.append((plus - minus) / (2 * h))
    return np.stack(columns, axis=1)


def expected_response(count: int) -> np.ndarray:
    """Zero row for Q above diag(+identity, -identity)."""
    block = np.zeros((2 * count, 2 * count))
    block[:count, :count] = np.eye(count)
    block[count:, count:] = -np.eye(count)
    return np.vstack([np.zeros((1, 2 * count)), block])


def gauge_decomposition_defect(pair: LogMapPair, m: int = 32) -> float:
    """max |zbar - sum abar_i Hbar_i - f| near w = infinity, abar_0 = 1, f = (ubar + sum abar log wbar)/2."""
    bar = pair.zbar_half
    radius = 0.5 * float(np.min(np.abs(bar.p)))  # type: ignore[attr-defined]
    y = radius * np.exp(2j * np.pi * (np.arange(m) + 0.5) / m)
    w = 1.0 / y
    total = build_log_H(pair, 0, barred=True).value(w)
    for j in range(1, pair.n + 2):
        total = total + bar.a[j - 1] * build_log_H(pair, j, barred=True).value(w)  # type: ignore[attr-defined]
    gauge = 0.5 * (bar.u + np.sum(bar.a * np.log(bar.p)))  # type: ignore[attr-defined]
    return float(np.max(np.abs(bar.value_near_origin(y) - total - gauge)))


def coalescence_error(pair: RationalMapPair, i: int, eps: float, w: np.ndarray, barred: bool = False) -> float:
    """max |(Hlog_{2i-1} - Hlog_{2i})/eps - h_{2i-1}| for the log map whose branch pairs close on the poles."""
    if i < 1 or i > pair.n_poles:
        raise IndexRangeViolation(f"pole index {i} outside 1..{pair.n_poles}")
    z, b = pair.z_half, pair.zbar_half
    log_map = coalesce(
        pair.r,
        z.u0,  # type: ignore[attr-defined]
        list(zip(z.c, z.p)),  # type: ignore[attr-defined]
        eps,
        b.u0,  # type: ignore[attr-defined]
        list(zip(b.c, b.p)),  # type: ignore[attr-defined]
        physical=pair.physical,
    )
    first = build_log_H(log_map, 2 * i - 1, barred).value(w)
    second = build_log_H(log_map, 2 * i, barred).value(w)
    target = build_rational_h(pair, 2 * i - 1, barred).value(w)
    return float(np.max(np.abs((first - second) / eps - target)))


def zero_curvature_check(z: XLaurent, i: int, j: int) -> float:
    return zero_curvature_defect(z, i, j)


__all__ = [
    "FunctionPayload",
    "allowed_functions",
    "build_Hk",
    "build_log_H",
    "build_rational_h",
    "coalescence_error",
    "commutator_check",
    "conserved_vector",
    "expected_response",
    "flow_evolve",
    "flow_rhs",
    "gauge_decomposition_defect",
    "payload_dot",
    "response_matrix",
    "refusal",
    "zero_curvature_check",
]
