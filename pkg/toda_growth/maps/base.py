"""Shared machinery for the reduced conformal-map pairs.

Every pair is built from two *halves*: one-variable functions f(s) of the form
``r*s + (part regular at s = infinity)``.  The unbarred map is z(w) = F(w) and
the barred map is zbar(w) = Fbar(1/w).  Exchanging the halves gives the pair
seen from the barred side, which is how every barred quantity is computed.

Parameter vector layout: ``[r, own params of F, own params of Fbar]``.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import ClassVar, List, Optional, Tuple, Type, TypeVar

import numpy as np

from ..errors import InvalidMap, SingularPoint, ZeroArgument
from ..laurent import LaurentSeries

logger = logging.getLogger(__name__)

SINGULAR_TOL = 1e-12
REAL_TOL = 1e-9

H = TypeVar("H", bound="Half")
M = TypeVar("M", bound="MapPair")


def as_complex(value: object) -> complex:
    """Accept numbers, [re, im] pairs and numeric strings."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise InvalidMap(f"complex value must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(float(value))
    return complex(value)  # type: ignore[arg-type]


class Half(ABC):
    """One side of a map pair, a function of a single variable s."""

    def __init__(self, r: complex) -> None:
        self.r = complex(r)

    @property
    @abstractmethod
    def own_params(self) -> np.ndarray:
        """Parameters other than r, in storage order."""

    @abstractmethod
    def own_labels(self, prefix: str) -> List[str]:
        ...

    @abstractmethod
    def with_params(self: H, r: complex, own: np.ndarray) -> H:
        ...

    @abstractmethod
    def value(self, s: np.ndarray) -> np.ndarray:
        """Closed-form f(s), branch chosen to be analytic near s = infinity."""

    @abstractmethod
    def deriv(self, s: np.ndarray) -> np.ndarray:
        """df/ds."""

    @abstractmethod
    def grad(self, s: np.ndarray) -> np.ndarray:
        """Shape (len(s), 1 + n_own): column 0 is d/dr, then the own parameters."""

    @abstractmethod
    def expansion(self, depth: int) -> LaurentSeries:
        """Laurent coefficients at s = infinity for exponents 1 .. -depth."""

    @abstractmethod
    def expansion_dot(self, dr: complex, own_dot: np.ndarray, depth: int) -> LaurentSeries:
        """Directional derivative of ``expansion`` along (dr, own_dot)."""

    def singularities(self) -> np.ndarray:
        """Finite singular points in s other than the behaviour at infinity."""
        return np.zeros(0, dtype=np.complex128)

    @property
    def exact(self) -> bool:
        """True when the expansion at infinity terminates."""
        return False

    def value_at_origin(self) -> complex:
        raise SingularPoint(f"{type(self).__name__} has no finite value at s = 0")

    def value_near_origin(self, s: np.ndarray) -> np.ndarray:
        """f on a branch analytic near s = 0 (differs from ``value`` by a constant)."""
        return self.value(s)

    def validate(self) -> None:
        if self.r == 0:
            raise InvalidMap("r must be nonzero")
        sing = self.singularities()
        if np.any(sing == 0):
            raise InvalidMap("singular points must be nonzero")
        for i in range(sing.size):
            for j in range(i + 1, sing.size):
                if sing[i] == sing[j]:
                    raise InvalidMap(f"coincident singular points at {sing[i]}")

    def conjugate(self: H) -> H:
        return self.with_params(np.conj(self.r), np.conj(self.own_params))

    def check_clear(self, s: np.ndarray) -> None:
        sing = self.singularities()
        if sing.size and np.any(np.abs(s[..., None] - sing) < SINGULAR_TOL):
            raise SingularPoint("evaluation point on a pole or branch point")


class MapPair(ABC):
    """The reduced pair (z, zbar) with its finite parameter vector."""

    kind: ClassVar[str]
    half_type: ClassVar[Type[Half]]

    def __init__(self, z_half: Half, zbar_half: Half, real_structure: bool = False, physical: bool = False) -> None:
        if z_half.r != zbar_half.r:
            raise InvalidMap("both halves must share r")
        self.z_half = z_half
        self.zbar_half = zbar_half
        self.real_structure = bool(real_structure)
        self.physical = bool(physical)
        self._validate()

    # construction -------------------------------------------------------
    @classmethod
    def from_halves(cls: Type[M], z_half: Half, zbar_half: Half, real_structure: bool = False, physical: bool = False) -> M:
        obj = cls.__new__(cls)
        MapPair.__init__(obj, z_half, zbar_half, real_structure, physical)
        return obj

    def _validate(self) -> None:
        self.z_half.validate()
        self.zbar_half.validate()
        self.validate_kind()
        if self.real_structure:
            defect = self.symmetry_defect(self.params())
            scale = max(1.0, float(np.max(np.abs(self.params()))))
            if defect > REAL_TOL * scale:
                raise InvalidMap(f"real structure violated (defect {defect:.3e})")
            if self.r.real <= 0:
                raise InvalidMap("real structure requires r > 0")
        if self.physical:
            for half, name in ((self.z_half, "z"), (self.zbar_half, "zbar")):
                sing = half.singularities()
                if sing.size and np.max(np.abs(sing)) >= 1.0:
                    raise InvalidMap(f"physical mode needs the {name} singular points inside the unit disk")

    def validate_kind(self) -> None:
        """Hook for kind-specific invariants."""

    @property
    def r(self) -> complex:
        return self.z_half.r

    # parameters ---------------------------------------------------------
    @property
    def n_z(self) -> int:
        return int(self.z_half.own_params.size)

    @property
    def dimension(self) -> int:
        return 1 + self.n_z + int(self.zbar_half.own_params.size)

    def params(self) -> np.ndarray:
        return np.concatenate([[self.r], self.z_half.own_params, self.zbar_half.own_params]).astype(np.complex128)

    def param_labels(self) -> List[str]:
        return ["r", *self.z_half.own_labels(""), *self.zbar_half.own_labels("bar")]

    def split(self, vec: np.ndarray) -> Tuple[complex, np.ndarray, np.ndarray]:
        vec = np.asarray(vec, dtype=np.complex128)
        return complex(vec[0]), vec[1 : 1 + self.n_z], vec[1 + self.n_z :]

    def with_params(self: M, vec: np.ndarray, real_structure: Optional[bool] = None) -> M:
        """New pair with the given parameters; projects onto the real structure when it is on."""
        real = self.real_structure if real_structure is None else real_structure
        if real:
            vec = self.symmetrize(vec)
        r, own_z, own_b = self.split(vec)
        return type(self).from_halves(
            self.z_half.with_params(r, own_z),
            self.zbar_half.with_params(r, own_b),
            real,
            self.physical,
        )

    def with_flags(self: M, real_structure: Optional[bool] = None, physical: Optional[bool] = None) -> M:
        return type(self).from_halves(
            self.z_half,
            self.zbar_half,
            self.real_structure if real_structure is None else real_structure,
            self.physical if physical is None else physical,
        )

    def symmetry_defect(self, vec: np.ndarray) -> float:
        r, own_z, own_b = self.split(vec)
        if own_z.size != own_b.size:
            return float("inf")
        parts = [abs(r.imag)]
        if own_z.size:
            parts.append(float(np.max(np.abs(own_b - np.conj(own_z)))))
        return max(parts)

    def symmetrize(self, vec: np.ndarray) -> np.ndarray:
        r, own_z, own_b = self.split(vec)
        mean = 0.5 * (own_z + np.conj(own_b))
        return np.concatenate([[r.real], mean, np.conj(mean)]).astype(np.complex128)

    def swapped(self: M) -> M:
        """The pair seen from the barred side: z' = Fbar(w), zbar' = F(1/w)."""
        return type(self).from_halves(self.zbar_half, self.z_half, self.real_structure, self.physical)

    # evaluation ---------------------------------------------------------
    def eval_z(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=np.complex128)
        self.z_half.check_clear(w)
        return self.z_half.value(w)

    def eval_zbar(self, w: np.ndarray) -> np.ndarray:
        s = self._inverse(w)
        self.zbar_half.check_clear(s)
        return self.zbar_half.value(s)

    def z_w(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=np.complex128)
        return self.z_half.deriv(w)

    def zbar_w(self, w: np.ndarray) -> np.ndarray:
        s = self._inverse(w)
        return -self.zbar_half.deriv(s) * s ** 2

    def z_grad(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=np.complex128).reshape(-1)
        out = np.zeros((w.size, self.dimension), dtype=np.complex128)
        g = self.z_half.grad(w)
        out[:, 0] = g[:, 0]
        out[:, 1 : 1 + self.n_z] = g[:, 1:]
        return out

    def zbar_grad(self, w: np.ndarray) -> np.ndarray:
        s = self._inverse(np.asarray(w, dtype=np.complex128).reshape(-1))
        out = np.zeros((s.size, self.dimension), dtype=np.complex128)
        g = self.zbar_half.grad(s)
        out[:, 0] = g[:, 0]
        out[:, 1 + self.n_z :] = g[:, 1:]
        return out

    @staticmethod
    def _inverse(w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=np.complex128)
        if np.any(w == 0):
            raise ZeroArgument("zbar is singular at w = 0")
        return 1.0 / w

    # Laurent data -------------------------------------------------------
    def expand_z_at_infinity(self, depth: int) -> LaurentSeries:
        return self.z_half.expansion(depth)

    def expand_zbar_at_zero(self, depth: int) -> LaurentSeries:
        return self.zbar_half.expansion(depth).reflect()

    def expand_z_dot(self, tangent: np.ndarray, depth: int) -> LaurentSeries:
        dr, own_z, _ = self.split(tangent)
        return self.z_half.expansion_dot(dr, own_z, depth)

    def expand_zbar_dot(self, tangent: np.ndarray, depth: int) -> LaurentSeries:
        dr, _, own_b = self.split(tangent)
        return self.zbar_half.expansion_dot(dr, own_b, depth).reflect()

    @property
    def exact(self) -> bool:
        return self.z_half.exact and self.zbar_half.exact

    # geometry helpers ---------------------------------------------------
    def z_singularities(self) -> np.ndarray:
        """Singular points of z(w)."""
        return self.z_half.singularities()

    def zbar_singularities(self) -> np.ndarray:
        """Singular points of zbar(w), i.e. 1/(singular points of Fbar)."""
        return 1.0 / self.zbar_half.singularities()

    def annulus(self) -> Tuple[float, float]:
        """Radii (inner, outer) between which both z and zbar are analytic."""
        zs = self.z_singularities()
        bs = self.zbar_half.singularities()
        inner = float(np.max(np.abs(zs))) if zs.size else 0.0
        outer = 1.0 / float(np.max(np.abs(bs))) if bs.size else float("inf")
        return inner, outer

    def collocation_radius(self) -> float:
        if self.physical:
            return 1.0
        inner, outer = self.annulus()
        if inner >= outer:
            raise SingularPoint(f"no common annulus of analyticity ({inner:.3g} >= {outer:.3g})")
        if inner == 0.0 and outer == float("inf"):
            return 1.0
        if inner == 0.0:
            return min(1.0, 0.5 * outer)
        if outer == float("inf"):
            return max(1.0, 2.0 * inner)
        return float(np.sqrt(inner * outer))

    def __repr__(self) -> str:
        values = ", ".join(f"{label}={value:.6g}" for label, value in zip(self.param_labels(), self.params()))
        return f"{type(self).__name__}({values}, real_structure={self.real_structure}, physical={self.physical})"

