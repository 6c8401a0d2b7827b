"""Linear and quadratic Poisson structures of the rational 1dToda reduction on a periodic grid.

The Lax function is z = q(w)/p(w) with q = w^(N+1) + a_N w^N + ... + a_0 and
p = b_N w^N + ... + b_0, every a_i, b_i a field of x sampled on m equispaced
nodes.  A bracket term ``c F(x) G(y) delta'(x - y)`` acts on a covector phi
as ``c F (G phi)'`` with the x-derivative taken spectrally.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np

from .errors import ContourThroughPole, DegenerateTangent, IndexRangeViolation
from .quadrature import circle_nodes, contour_integral

logger = logging.getLogger(__name__)

FieldKey = Tuple[str, int]
POLE_TOL = 1e-12


@dataclass(frozen=True)
class FieldGrid:
    L: float
    m: int
    a: np.ndarray  # (N+1, m), a_{N+1} = 1 is implicit
    b: np.ndarray  # (N+1, m)

    def __post_init__(self) -> None:
        if self.m < 8 or self.m & (self.m - 1):
            raise ValueError("grid size must be a power of two >= 8")
        a = np.atleast_2d(np.asarray(self.a, dtype=np.complex128))
        b = np.atleast_2d(np.asarray(self.b, dtype=np.complex128))
        if a.shape != b.shape or a.shape[1] != self.m:
            raise ValueError(f"a and b must both have shape (N+1, {self.m})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def N(self) -> int:
        return self.a.shape[0] - 1

    @property
    def x(self) -> np.ndarray:
        return self.L * np.arange(self.m) / self.m

    def keys(self) -> List[FieldKey]:
        return [("a", l) for l in range(self.N + 1)] + [("b", l) for l in range(self.N + 1)]

    def field(self, key: FieldKey) -> Optional[np.ndarray]:
        """Field values, ones for the frozen a_{N+1}, None outside the index range."""
        name, j = key
        if name == "a" and j == self.N + 1:
            return np.ones(self.m, dtype=np.complex128)
        if 0 <= j <= self.N:
            return self.a[j] if name == "a" else self.b[j]
        return None

    def shifted(self, lam: complex) -> "FieldGrid":
        """The grid with a_i -> a_i + lam b_i."""
        return FieldGrid(self.L, self.m, self.a + lam * self.b, self.b.copy())

    def smoothness_defect(self) -> float:
        """Largest share of spectral energy in the top half of the resolved modes."""
        worst = 0.0
        for row in np.vstack([self.a, self.b]):
            spectrum = np.abs(np.fft.fft(row))
            k = np.abs(np.fft.fftfreq(self.m, 1.0 / self.m))
            total = float(np.linalg.norm(spectrum)) or 1.0
            worst = max(worst, float(np.linalg.norm(spectrum[k > self.m // 4])) / total)
        return worst


@dataclass
class FieldFlow:
    """Time derivatives of every dynamical field; ``leakage`` is set by ``lax_flow``."""

    a: np.ndarray
    b: np.ndarray
    leakage: Optional[np.ndarray] = None

    def __sub__(self, other: "FieldFlow") -> "FieldFlow":
        return FieldFlow(self.a - other.a, self.b - other.b)

    def scaled(self, factor: complex) -> "FieldFlow":
        return FieldFlow(self.a * factor, self.b * factor)

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.a)), np.max(np.abs(self.b))))


def flow_distance(first: FieldFlow, second: FieldFlow) -> float:
    """max |first - second| relative to the size of first."""
    scale = max(first.max_abs(), 1e-300)
    return (first - second).max_abs() / scale


def spectral_derivative(values: np.ndarray, L: float) -> np.ndarray:
    m = values.shape[-1]
    k = 2j * np.pi / L * np.fft.fftfreq(m, 1.0 / m)
    k[m // 2] = 0.0
    return np.fft.ifft(k * np.fft.fft(values, axis=-1), axis=-1)


# bracket tables -----------------------------------------------------------
@dataclass(frozen=True)
class Term:
    coef: float
    f: FieldKey  # factor at x
    g: FieldKey  # factor at y


def _valid(key: FieldKey, N: int) -> bool:
    name, j = key
    return 0 <= j <= (N + 1 if name == "a" else N)


def _collect(raw: List[Tuple[float, FieldKey, FieldKey]], N: int) -> List[Term]:
    return [Term(float(c), f, g) for c, f, g in raw if c != 0 and _valid(f, N) and _valid(g, N)]


def _quadratic_aa(k: int, l: int, N: int) -> List[Term]:
    raw = []
    for n in range(1, N + 2):
        raw.append((l + n - k, ("a", k - n), ("a", l + n)))
        raw.append((n, ("a", l + n), ("a", k - n)))
    raw.append((l - N - 1, ("a", k), ("a", l)))
    return _collect(raw, N)


def _quadratic_bb(k: int, l: int, N: int) -> List[Term]:
    raw = []
    for n in range(1, N + 2):
        raw.append((k - l - n, ("b", k - n), ("b", l + n)))
        raw.append((-n, ("b", l + n), ("b", k - n)))
    raw.append(((k - l) / 2, ("b", k), ("b", l)))
    return _collect(raw, N)


def _quadratic_ab(k: int, l: int, N: int) -> List[Term]:
    return _collect([((k - N - 1) / 2, ("a", k), ("b", l))], N)


def _linear_aa(k: int, l: int, N: int) -> List[Term]:
    raw = []
    for n in range(1, N + 2):
        raw.append((k - l - n, ("a", k - n), ("b", l + n)))
        raw.append((k - l - n, ("b", k - n), ("a", l + n)))
        raw.append((-n, ("b", l + n), ("a", k - n)))
        raw.append((-n, ("a", l + n), ("b", k - n)))
    raw.append(((N + 1 - l) / 2, ("b", k), ("a", l)))
    raw.append(((k + N + 1 - 2 * l) / 2, ("a", k), ("b", l)))
    return _collect(raw, N)


def _linear_ab(k: int, l: int, N: int) -> List[Term]:
    raw = []
    for n in range(1, N + 2):
        raw.append((k - l - n, ("b", k - n), ("b", l + n)))
        raw.append((-n, ("b", l + n), ("b", k - n)))
    raw.append(((N + 1 - l) / 2, ("b", k), ("b", l)))
    return _collect(raw, N)


def _linear_bb(k: int, l: int, N: int) -> List[Term]:
    return []


@dataclass(frozen=True)
class BracketStructure:
    """One Poisson structure as its table of delta' terms.

    ``orientation`` is the sign with which the table, contracted with dH, gives
    the Lax flow of the matching time.
    """

    kind: Literal["linear", "quadratic"]
    orientation: int

    def _tables(self):
        if self.kind == "quadratic":
            return _quadratic_aa, _quadratic_ab, _quadratic_bb
        return _linear_aa, _linear_ab, _linear_bb

    def terms(self, u: FieldKey, v: FieldKey, N: int) -> List[Term]:
        """{u(x), v(y)} as a list of terms."""
        for name, j in (u, v):
            if name not in ("a", "b") or not 0 <= j <= N:
                raise IndexRangeViolation(f"bracket field {name}_{j} outside 0..{N}")
        aa, ab, bb = self._tables()
        (su, k), (sv, l) = u, v
        if su == "a" and sv == "a":
            return aa(k, l, N)
        if su == "b" and sv == "b":
            return bb(k, l, N)
        if su == "a":
            return ab(k, l, N)
        return [Term(t.coef, t.g, t.f) for t in ab(l, k, N)]

    def hamiltonian_index(self, time: int) -> int:
        """Index of the Hamiltonian generating the time-``time`` flow."""
        return time if self.kind == "linear" else time - 1


LINEAR = BracketStructure("linear", -1)
QUADRATIC = BracketStructure("quadratic", 1)
STRUCTURES: Dict[str, BracketStructure] = {"linear": LINEAR, "quadratic": QUADRATIC}


# contour data -------------------------------------------------------------
def _q(grid: FieldGrid, w: np.ndarray) -> np.ndarray:
    powers = w[None, :] ** np.arange(grid.N + 2)[:, None]
    return grid.a.T @ powers[:-1] + powers[-1][None, :]


def _p(grid: FieldGrid, w: np.ndarray) -> np.ndarray:
    powers = w[None, :] ** np.arange(grid.N + 1)[:, None]
    return grid.b.T @ powers


def _checked_p(grid: FieldGrid, w: np.ndarray) -> np.ndarray:
    p = _p(grid, w)
    if np.min(np.abs(p)) < POLE_TOL:
        raise ContourThroughPole("p vanishes on the coefficient contour")
    return p


def contour_radius(grid: FieldGrid) -> float:
    """1 + 2 max |root of p| over the grid, clear of every pole of z."""
    if grid.N == 0:
        return 1.0
    largest = 0.0
    for k in range(grid.m):
        roots = np.roots(grid.b[::-1, k])
        if roots.size:
            largest = max(largest, float(np.max(np.abs(roots))))
    return 1.0 + 2.0 * largest


def _z(grid: FieldGrid, w: np.ndarray) -> np.ndarray:
    return _q(grid, w) / _checked_p(grid, w)


def h_density(grid: FieldGrid, i: int) -> np.ndarray:
    """(z^(i+1))_0 / (i+1) at every node."""
    if i < 0:
        raise IndexRangeViolation("Hamiltonian index must be >= 0")
    R = contour_radius(grid)
    return np.asarray(contour_integral(lambda w: _z(grid, w) ** (i + 1) / w, 0.0, R)) / (i + 1)


def var_derivative(grid: FieldGrid, i: int, key: FieldKey) -> np.ndarray:
    """Variational derivative of H_i with respect to a_l or b_l (no x-derivatives in the density)."""
    if i < 0:
        raise IndexRangeViolation("Hamiltonian index must be >= 0")
    name, l = key
    if name not in ("a", "b") or not 0 <= l <= grid.N:
        raise IndexRangeViolation(f"no dynamical field {name}_{l} for N = {grid.N}")
    R = contour_radius(grid)

    def integrand(w: np.ndarray) -> np.ndarray:
        q, p = _q(grid, w), _checked_p(grid, w)
        dz = w ** l / p if name == "a" else -(w ** l) * q / p ** 2
        return (q / p) ** i * dz / w

    return np.asarray(contour_integral(integrand, 0.0, R))


def covector(grid: FieldGrid, i: int) -> Dict[FieldKey, np.ndarray]:
    return {key: var_derivative(grid, i, key) for key in grid.keys()}


# flows --------------------------------------------------------------------
def apply_structure(
    grid: FieldGrid, structure: BracketStructure, phi: Dict[FieldKey, np.ndarray], oriented: bool = True
) -> FieldFlow:
    """d/dt u = sum_v {u, v} phi_v, term by term."""
    rates = {}
    for u in grid.keys():
        total = np.zeros(grid.m, dtype=np.complex128)
        for v in grid.keys():
            for term in structure.terms(u, v, grid.N):
                F, G = grid.field(term.f), grid.field(term.g)
                total += term.coef * F * spectral_derivative(G * phi[v], grid.L)
        rates[u] = total
    flow = FieldFlow(
        a=np.stack([rates[("a", l)] for l in range(grid.N + 1)]),
        b=np.stack([rates[("b", l)] for l in range(grid.N + 1)]),
    )
    return flow.scaled(structure.orientation) if oriented else flow


def poisson_flow(grid: FieldGrid, structure: BracketStructure, i: int) -> FieldFlow:
    """Flow generated by the Hamiltonian H_i = (1/(i+1)) integral (z^(i+1))_0 dx."""
    if i < 0:
        raise IndexRangeViolation("Hamiltonian index must be >= 0")
    return apply_structure(grid, structure, covector(grid, i))


def lax_flow(grid: FieldGrid, i: int) -> FieldFlow:
    """dz/dt_i = {H_i, z} with H_i = (z^i)_+ + (z^i)_0/2, fitted node by node to the rational tangent."""
    if i < 1:
        raise IndexRangeViolation("Lax flows start at i = 1")
    N, L = grid.N, grid.L
    R = contour_radius(grid)

    def coefficients(w: np.ndarray) -> np.ndarray:
        z_i = _z(grid, w) ** i
        return np.stack([z_i * w ** (-j) / w for j in range(i + 1)])

    c = np.asarray(contour_integral(coefficients, 0.0, R))  # (i+1, m)
    c[0] *= 0.5
    c_x = spectral_derivative(c, L)

    samples = circle_nodes(0.0, R, max(32, 8 * (N + 2)))
    q, p = _q(grid, samples), _checked_p(grid, samples)
    powers = samples[None, :] ** np.arange(N + 2)[:, None]
    q_w = (grid.a[1:].T * np.arange(1, N + 1)) @ powers[: N] + (N + 1) * powers[N][None, :] if N else np.ones_like(q)
    p_w = (grid.b[1:].T * np.arange(1, N + 1)) @ powers[:N] if N else np.zeros_like(p)
    q_x = spectral_derivative(grid.a, L).T @ powers[: N + 1]
    p_x = spectral_derivative(grid.b, L).T @ powers[: N + 1]
    z_x = (p * q_x - q * p_x) / p ** 2
    z_w = (p * q_w - q * p_w) / p ** 2
    H_w = sum(j * c[j][:, None] * samples[None, :] ** (j - 1) for j in range(1, i + 1))
    H_x = sum(c_x[j][:, None] * samples[None, :] ** j for j in range(i + 1))
    rhs = samples[None, :] * (H_w * z_x - H_x * z_w)

    a_dot = np.zeros((N + 1, grid.m), dtype=np.complex128)
    b_dot = np.zeros((N + 1, grid.m), dtype=np.complex128)
    leakage = np.zeros(grid.m)
    for k in range(grid.m):
        basis = np.concatenate(
            [powers[: N + 1].T / p[k][:, None], -(powers[: N + 1].T) * (q[k] / p[k] ** 2)[:, None]], axis=1
        )
        S = np.linalg.svd(basis, compute_uv=False)
        if S[-1] < 1e-12 * S[0]:
            raise DegenerateTangent(f"rational tangent basis is rank deficient at node {k}")
        solution = np.linalg.lstsq(basis, rhs[k], rcond=None)[0]
        a_dot[:, k], b_dot[:, k] = solution[: N + 1], solution[N + 1 :]
        leakage[k] = float(np.linalg.norm(rhs[k] - basis @ solution) / np.sqrt(samples.size))
    return FieldFlow(a=a_dot, b=b_dot, leakage=leakage)


def triple_agreement(grid: FieldGrid, i: int) -> Tuple[float, float, float]:
    """(linear vs Lax, quadratic vs Lax, max Lax leakage) for the time-i flow."""
    lax = lax_flow(grid, i)
    linear = poisson_flow(grid, LINEAR, LINEAR.hamiltonian_index(i))
    quadratic = poisson_flow(grid, QUADRATIC, QUADRATIC.hamiltonian_index(i))
    leak = float(np.max(lax.leakage)) if lax.leakage is not None else 0.0
    return flow_distance(lax, linear), flow_distance(lax, quadratic), leak


# brackets of smeared functionals ------------------------------------------
def smeared_bracket(
    grid: FieldGrid,
    structure: BracketStructure,
    F: Tuple[FieldKey, np.ndarray],
    G: Tuple[FieldKey, np.ndarray],
) -> complex:
    """{integral f u dx, integral g v dy} from the printed table."""
    (u, f), (v, g) = F, G
    total = 0j
    for term in structure.terms(u, v, grid.N):
        A, B = grid.field(term.f), grid.field(term.g)
        total += term.coef * np.sum(f * A * spectral_derivative(B * g, grid.L))
    return complex(total * grid.L / grid.m)


def pencil_defect(grid: FieldGrid, lam: complex, phi: Optional[Dict[FieldKey, np.ndarray]] = None) -> float:
    """Relative gap between the quadratic structure pulled back from a + lam b and quadratic - lam linear."""
    phi = covector(grid, 1) if phi is None else phi
    N = grid.N
    psi = {("a", l): phi[("a", l)] for l in range(N + 1)}
    psi.update({("b", l): phi[("b", l)] - lam * phi[("a", l)] for l in range(N + 1)})
    moved = apply_structure(grid.shifted(lam), QUADRATIC, psi, oriented=False)
    pulled = FieldFlow(a=moved.a - lam * moved.b, b=moved.b)
    target = apply_structure(grid, QUADRATIC, phi, oriented=False) - apply_structure(
        grid, LINEAR, phi, oriented=False
    ).scaled(lam)
    return flow_distance(target, pulled)


__all__ = [
    "BracketStructure",
    "FieldFlow",
    "FieldGrid",
    "LINEAR",
    "QUADRATIC",
    "STRUCTURES",
    "apply_structure",
    "contour_radius",
    "covector",
    "flow_distance",
    "h_density",
    "lax_flow",
    "pencil_defect",
    "poisson_flow",
    "smeared_bracket",
    "spectral_derivative",
    "triple_agreement",
    "var_derivative",
]
