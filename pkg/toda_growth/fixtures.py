"""Named and seeded fixture maps and grids used by the CLI battery and the tests."""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, List

import numpy as np

from .bihamiltonian import FieldGrid
from .maps import LogMapPair, MapPair, PolyMapPair, RationalMapPair


def circle(r0: float = 1.0) -> PolyMapPair:
    return PolyMapPair(r0, [0.0], real_structure=True, physical=True)


def ellipse(r: float = 1.0, alpha: float = 0.3) -> PolyMapPair:
    """z = r w + alpha r / w."""
    return PolyMapPair(r, [0.0, alpha * r], real_structure=True, physical=True)


def polynomial_n2() -> PolyMapPair:
    return PolyMapPair(1.0, [0.05 + 0.02j, 0.1 - 0.05j, 0.04 + 0.03j], real_structure=True, physical=True)


def formal_polynomial_n2() -> PolyMapPair:
    """A deliberately non-physical pair with large, unrelated barred data."""
    return PolyMapPair(1.2, [0.3, 0.5, 0.4], [0.2, 0.6, 0.3])


def logarithmic_n1() -> LogMapPair:
    return LogMapPair(1.0, 0.1, [("1/10", 0.3 + 0.1j), ("-1/10", -0.2 + 0.25j)], real_structure=True, physical=True)


def rational_n1() -> RationalMapPair:
    return RationalMapPair(1.0, 0.05, [(0.1 + 0.05j, 0.4 - 0.1j)], real_structure=True, physical=True)


def formal_rational_n1() -> RationalMapPair:
    return RationalMapPair(1.0, 0.1, [(0.4, 0.5)], 0.2, [(0.3, 0.4)])


FIXTURES: Dict[str, Callable[[], MapPair]] = {
    "circle": circle,
    "ellipse": ellipse,
    "polynomial_n2": polynomial_n2,
    "formal_polynomial_n2": formal_polynomial_n2,
    "logarithmic_n1": logarithmic_n1,
    "rational_n1": rational_n1,
    "formal_rational_n1": formal_rational_n1,
}


def _small_complex(rng: np.random.Generator, scale: float) -> complex:
    radius = scale * float(rng.uniform(0.2, 1.0))
    angle = float(rng.uniform(0.0, 2 * np.pi))
    return complex(radius * np.cos(angle), radius * np.sin(angle))


def random_polynomial(rng: np.random.Generator, N: int) -> PolyMapPair:
    """Real, physical, with sum k |u_k| <= r/2 so the boundary stays smooth."""
    r = float(rng.uniform(0.8, 1.5))
    weights = rng.uniform(0.2, 1.0, size=N) if N else np.zeros(0)
    budget = 0.5 * r
    u: List[complex] = [_small_complex(rng, 0.2)]
    for k in range(1, N + 1):
        share = budget * float(weights[k - 1] / weights.sum()) / k
        angle = float(rng.uniform(0.0, 2 * np.pi))
        u.append(share * complex(np.cos(angle), np.sin(angle)))
    return PolyMapPair(r, u, real_structure=True, physical=True)


def _charges(rng: np.random.Generator, count: int) -> List[Fraction]:
    while True:
        head = [Fraction(int(rng.integers(-3, 4)), 40) for _ in range(count - 1)]
        charges = head + [-sum(head, Fraction(0))]
        if all(c != 0 for c in charges) and sum(abs(c) for c in charges) <= Fraction(3, 10):
            return charges


def _points(rng: np.random.Generator, count: int, radius: float) -> List[complex]:
    while True:
        points = [_small_complex(rng, radius) for _ in range(count)]
        gaps = [abs(p - q) for i, p in enumerate(points) for q in points[i + 1 :]]
        if not gaps or min(gaps) > 0.1:
            return points


def random_logarithmic(rng: np.random.Generator, n: int) -> LogMapPair:
    r = float(rng.uniform(0.9, 1.3))
    branch = [(str(a), p) for a, p in zip(_charges(rng, n + 1), _points(rng, n + 1, 0.5))]
    return LogMapPair(r, _small_complex(rng, 0.2), branch, real_structure=True, physical=True)


def random_rational(rng: np.random.Generator, n: int) -> RationalMapPair:
    r = float(rng.uniform(0.9, 1.3))
    poles = [(_small_complex(rng, 0.08), p) for p in _points(rng, n, 0.45)]
    return RationalMapPair(r, _small_complex(rng, 0.2), poles, real_structure=True, physical=True)


RANDOM_FIXTURES: Dict[str, Callable[[np.random.Generator, int], MapPair]] = {
    "polynomial": random_polynomial,
    "rational": random_rational,
    "logarithmic": random_logarithmic,
}


def grid_fixture(N: int, m: int = 256, L: float = 2 * np.pi, amplitude: float = 1e-2) -> FieldGrid:
    """Nonzero constants plus single-mode sine perturbations; p keeps its roots well inside |w| = 1."""
    x = L * np.arange(m) / m
    a = np.stack([(0.6 + 0.2 * i) + amplitude * np.sin(2 * np.pi * x / L + i) for i in range(N + 1)])
    b = np.stack(
        [(1.0 if i == N else 0.3 / (i + 1)) + amplitude * np.cos(2 * np.pi * (i + 1) * x / L) for i in range(N + 1)]
    )
    return FieldGrid(L, m, a.astype(np.complex128), b.astype(np.complex128))
