"""Rational reduction with simple poles.

z = r w + u_0 + sum u_j/(w - w_j),  zbar = r/w + ubar_0 + sum ubar_j/(1/w - wbar_j).
"""
from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidMap
from ..laurent import LaurentSeries
from .base import Half, MapPair, as_complex

Pole = Tuple[complex, complex]


class RationalHalf(Half):
    """f(s) = r s + u0 + sum c_j/(s - p_j); own params [u0, c_1, p_1, c_2, p_2, ...]."""

    def __init__(self, r: complex, u0: complex, residues: Sequence[complex], poles: Sequence[complex]) -> None:
        super().__init__(r)
        self.u0 = complex(u0)
        self.c = np.array(residues, dtype=np.complex128).reshape(-1)
        self.p = np.array(poles, dtype=np.complex128).reshape(-1)
        if self.c.size != self.p.size:
            raise InvalidMap("each pole needs exactly one residue")

    @property
    def n_poles(self) -> int:
        return int(self.p.size)

    @property
    def own_params(self) -> np.ndarray:
        pairs = np.empty(2 * self.n_poles, dtype=np.complex128)
        pairs[0::2] = self.c
        pairs[1::2] = self.p
        return np.concatenate([[self.u0], pairs])

    def own_labels(self, prefix: str) -> List[str]:
        labels = [f"u{prefix}_0"]
        for j in range(1, self.n_poles + 1):
            labels += [f"u{prefix}_{j}", f"w{prefix}_{j}"]
        return labels

    def with_params(self, r: complex, own: np.ndarray) -> "RationalHalf":
        own = np.asarray(own, dtype=np.complex128)
        return RationalHalf(r, own[0], own[1::2], own[2::2])

    def singularities(self) -> np.ndarray:
        return self.p.copy()

    def value(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.complex128)
        return self.r * s + self.u0 + np.sum(self.c / (s[..., None] - self.p), axis=-1)

    def deriv(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.complex128)
        return self.r - np.sum(self.c / (s[..., None] - self.p) ** 2, axis=-1)

    def grad(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.complex128).reshape(-1)
        cols = [s, np.ones_like(s)]
        for c, p in zip(self.c, self.p):
            cols.append(1.0 / (s - p))
            cols.append(c / (s - p) ** 2)
        return np.stack(cols, axis=1)

    def value_at_origin(self) -> complex:
        return complex(self.u0 - np.sum(self.c / self.p))

    def expansion(self, depth: int) -> LaurentSeries:
        # s^-m coefficient: sum c p^(m-1)
        terms = {1: self.r, 0: self.u0}
        for m in range(1, depth + 1):
            terms[-m] = complex(np.sum(self.c * self.p ** (m - 1)))
        return _window(terms, depth, truncated=self.n_poles > 0)

    def expansion_dot(self, dr: complex, own_dot: np.ndarray, depth: int) -> LaurentSeries:
        own_dot = np.asarray(own_dot, dtype=np.complex128)
        du0, dc, dp = own_dot[0], own_dot[1::2], own_dot[2::2]
        terms = {1: dr, 0: du0}
        for m in range(1, depth + 1):
            grow = (m - 1) * self.p ** (m - 2) if m >= 2 else np.zeros_like(self.p)
            terms[-m] = complex(np.sum(dc * self.p ** (m - 1) + self.c * grow * dp))
        return _window(terms, depth, truncated=self.n_poles > 0)


def _window(terms: dict, depth: int, truncated: bool) -> LaurentSeries:
    coeffs = [terms.get(k, 0j) for k in range(-depth, 2)]
    return LaurentSeries(-depth, coeffs, truncated)


class RationalMapPair(MapPair):
    kind = "rational"
    half_type = RationalHalf

    def __init__(
        self,
        r: complex,
        u0: object,
        poles: Sequence[Tuple[object, object]],
        ubar0: Optional[object] = None,
        poles_bar: Optional[Sequence[Tuple[object, object]]] = None,
        real_structure: bool = False,
        physical: bool = False,
    ) -> None:
        z_poles = [(as_complex(u), as_complex(w)) for u, w in poles]
        if poles_bar is None or ubar0 is None:
            if not real_structure:
                raise InvalidMap("barred data is required without the real structure")
            ubar0_val = as_complex(u0).conjugate()
            bar_poles = [(u.conjugate(), w.conjugate()) for u, w in z_poles]
        else:
            ubar0_val = as_complex(ubar0)
            bar_poles = [(as_complex(u), as_complex(w)) for u, w in poles_bar]
        r = as_complex(r)
        super().__init__(
            RationalHalf(r, as_complex(u0), [u for u, _ in z_poles], [w for _, w in z_poles]),
            RationalHalf(r, ubar0_val, [u for u, _ in bar_poles], [w for _, w in bar_poles]),
            real_structure,
            physical,
        )

    @property
    def n_poles(self) -> int:
        return self.z_half.n_poles  # type: ignore[attr-defined]

    def validate_kind(self) -> None:
        if self.z_half.n_poles != self.zbar_half.n_poles:  # type: ignore[attr-defined]
            raise InvalidMap("z and zbar need the same number of poles")
        if self.n_poles == 0:
            raise InvalidMap("rational maps need at least one pole")
