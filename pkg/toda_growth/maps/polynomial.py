"""Polynomial reduction: z = r w + sum u_k w^-k, zbar = r/w + sum ubar_k w^k, k = 0..N."""
from __future__ import annotations

from typing import List, Optional, Sequence

import numpy as np

from ..errors import InvalidMap
from ..laurent import LaurentSeries
from .base import Half, MapPair, as_complex


class PolyHalf(Half):
    """f(s) = r s + u_0 + u_1/s + ... + u_N/s^N."""

    def __init__(self, r: complex, u: Sequence[complex]) -> None:
        super().__init__(r)
        self.u = np.array(u, dtype=np.complex128).reshape(-1)
        if self.u.size == 0:
            raise InvalidMap("polynomial maps need at least u_0")

    @property
    def order(self) -> int:
        return int(self.u.size - 1)

    @property
    def own_params(self) -> np.ndarray:
        return self.u.copy()

    def own_labels(self, prefix: str) -> List[str]:
        return [f"u{prefix}_{k}" for k in range(self.u.size)]

    def with_params(self, r: complex, own: np.ndarray) -> "PolyHalf":
        return PolyHalf(r, own)

    @property
    def exact(self) -> bool:
        return True

    def value(self, s: np.ndarray) -> np.ndarray:
        return self.expansion(0).evaluate(s)

    def deriv(self, s: np.ndarray) -> np.ndarray:
        return self.expansion(0).deriv_w().evaluate(s)

    def grad(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.complex128).reshape(-1)
        powers = [s] + [s ** (-k) for k in range(self.u.size)]
        return np.stack(powers, axis=1)

    def expansion(self, depth: int) -> LaurentSeries:
        return LaurentSeries(-self.order, np.concatenate([self.u[::-1], [self.r]]))

    def expansion_dot(self, dr: complex, own_dot: np.ndarray, depth: int) -> LaurentSeries:
        return LaurentSeries(-self.order, np.concatenate([np.asarray(own_dot)[::-1], [dr]]))


class PolyMapPair(MapPair):
    kind = "polynomial"
    half_type = PolyHalf

    def __init__(
        self,
        r: complex,
        u: Sequence[object],
        ubar: Optional[Sequence[object]] = None,
        real_structure: bool = False,
        physical: bool = False,
    ) -> None:
        u_vals = [as_complex(v) for v in u]
        if ubar is None:
            if not real_structure:
                raise InvalidMap("ubar is required without the real structure")
            ubar_vals = [c.conjugate() for c in u_vals]
        else:
            ubar_vals = [as_complex(v) for v in ubar]
        if len(u_vals) != len(ubar_vals):
            raise InvalidMap("u and ubar must have the same length N+1")
        r = as_complex(r)
        super().__init__(PolyHalf(r, u_vals), PolyHalf(r, ubar_vals), real_structure, physical)

    @property
    def order(self) -> int:
        return self.z_half.order  # type: ignore[attr-defined]

    def validate_kind(self) -> None:
        if self.z_half.own_params.size != self.zbar_half.own_params.size:
            raise InvalidMap("u and ubar must have the same length N+1")
