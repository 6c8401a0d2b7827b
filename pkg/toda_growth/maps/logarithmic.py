"""Logarithmic reduction and its coalescence into the rational one.

z = r w + u + sum a_i log(w_i - w),  zbar = r/w + ubar + sum abar_i log(wbar_i - 1/w),
with fixed charges summing to zero on each side.
"""
from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import InvalidMap
from ..laurent import LaurentSeries
from .base import Half, MapPair, as_complex
from .rational import RationalMapPair

ExactCharge = Tuple[Fraction, Fraction]
ChargeLike = Union[int, float, complex, str, Fraction, Sequence[object]]


def exact_charge(value: ChargeLike) -> ExactCharge:
    """Parse a charge into exact rational (re, im); floats keep their shortest decimal form."""
    if isinstance(value, tuple) and len(value) == 2 and all(isinstance(v, Fraction) for v in value):
        return value  # type: ignore[return-value]
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise InvalidMap(f"charge must be a scalar or [re, im], got {value!r}")
        return _exact_real(value[0]), _exact_real(value[1])
    if isinstance(value, complex):
        return _exact_real(value.real), _exact_real(value.imag)
    return _exact_real(value), Fraction(0)


def _exact_real(value: object) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidMap(f"cannot read charge {value!r}") from exc
    raise InvalidMap(f"cannot read charge {value!r}")


def charge_value(charge: ExactCharge) -> complex:
    return complex(float(charge[0]), float(charge[1]))


class LogHalf(Half):
    """f(s) = r s + u + sum a_i Log(1 - p_i/s); own params [u, p_1, ..., p_{n+1}].

    The charges a_i are constants of the family and are not parameters.
    """

    def __init__(self, r: complex, u: complex, charges: Sequence[ChargeLike], points: Sequence[complex]) -> None:
        super().__init__(r)
        self.u = complex(u)
        self.charges: Tuple[ExactCharge, ...] = tuple(exact_charge(a) for a in charges)
        self.a = np.array([charge_value(c) for c in self.charges], dtype=np.complex128)
        self.p = np.array(points, dtype=np.complex128).reshape(-1)
        if self.a.size != self.p.size:
            raise InvalidMap("each branch point needs exactly one charge")

    @property
    def n_branch(self) -> int:
        return int(self.p.size)

    @property
    def own_params(self) -> np.ndarray:
        return np.concatenate([[self.u], self.p])

    def own_labels(self, prefix: str) -> List[str]:
        return [f"u{prefix}", *[f"w{prefix}_{i}" for i in range(1, self.n_branch + 1)]]

    def with_params(self, r: complex, own: np.ndarray) -> "LogHalf":
        own = np.asarray(own, dtype=np.complex128)
        return LogHalf(r, own[0], self.charges, own[1:])

    def conjugate(self) -> "LogHalf":
        conj = [(re, -im) for re, im in self.charges]
        return LogHalf(np.conj(self.r), np.conj(self.u), conj, np.conj(self.p))

    def singularities(self) -> np.ndarray:
        return self.p.copy()

    def charge_sum(self) -> ExactCharge:
        return sum((c[0] for c in self.charges), Fraction(0)), sum((c[1] for c in self.charges), Fraction(0))

    def validate(self) -> None:
        super().validate()
        if self.charge_sum() != (Fraction(0), Fraction(0)):
            raise InvalidMap(f"charges must sum to zero exactly, got {self.charge_sum()}")

    def value(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.complex128)
        logs = np.log(1.0 - self.p / s[..., None])
        return self.r * s + self.u + np.sum(self.a * logs, axis=-1)

    def value_near_origin(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.complex128)
        return self.r * s + self.u + np.sum(self.a * np.log(self.p - s[..., None]), axis=-1)

    def value_at_origin(self) -> complex:
        return complex(self.u + np.sum(self.a * np.log(self.p)))

    def deriv(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.complex128)
        return self.r + np.sum(self.a / (s[..., None] - self.p), axis=-1)

    def grad(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.complex128).reshape(-1)
        cols = [s, np.ones_like(s)]
        for a, p in zip(self.a, self.p):
            cols.append(-a / (s - p))
        return np.stack(cols, axis=1)

    def expansion(self, depth: int) -> LaurentSeries:
        # Log(1 - p/s) = -sum_k p^k / (k s^k)
        coeffs = [0j] * (depth + 2)
        coeffs[-1] = self.r
        coeffs[-2] = self.u
        for k in range(1, depth + 1):
            coeffs[depth - k] = complex(-np.sum(self.a * self.p ** k) / k)
        return LaurentSeries(-depth, coeffs, truncated=True)

    def expansion_dot(self, dr: complex, own_dot: np.ndarray, depth: int) -> LaurentSeries:
        own_dot = np.asarray(own_dot, dtype=np.complex128)
        du, dp = own_dot[0], own_dot[1:]
        coeffs = [0j] * (depth + 2)
        coeffs[-1] = dr
        coeffs[-2] = du
        for k in range(1, depth + 1):
            coeffs[depth - k] = complex(-np.sum(self.a * self.p ** (k - 1) * dp))
        return LaurentSeries(-depth, coeffs, truncated=True)


class LogMapPair(MapPair):
    kind = "logarithmic"
    half_type = LogHalf

    def __init__(
        self,
        r: complex,
        u: object,
        branch: Sequence[Tuple[ChargeLike, object]],
        ubar: Optional[object] = None,
        branch_bar: Optional[Sequence[Tuple[ChargeLike, object]]] = None,
        real_structure: bool = False,
        physical: bool = False,
    ) -> None:
        r = as_complex(r)
        z_half = LogHalf(r, as_complex(u), [a for a, _ in branch], [as_complex(w) for _, w in branch])
        if ubar is None or branch_bar is None:
            if not real_structure:
                raise InvalidMap("barred data is required without the real structure")
            zbar_half = z_half.conjugate().with_params(r, np.conj(z_half.own_params))
        else:
            zbar_half = LogHalf(r, as_complex(ubar), [a for a, _ in branch_bar], [as_complex(w) for _, w in branch_bar])
        super().__init__(z_half, zbar_half, real_structure, physical)

    @property
    def n(self) -> int:
        """Branch points per side are n + 1."""
        return self.z_half.n_branch - 1  # type: ignore[attr-defined]

    def validate_kind(self) -> None:
        if self.z_half.n_branch != self.zbar_half.n_branch:  # type: ignore[attr-defined]
            raise InvalidMap("z and zbar need the same number of branch points")
        if self.real_structure:
            conj = tuple((re, -im) for re, im in self.z_half.charges)  # type: ignore[attr-defined]
            if self.zbar_half.charges != conj:  # type: ignore[attr-defined]
                raise InvalidMap("real structure requires abar_i = conj(a_i)")


def coalesce(
    r: complex,
    u0: object,
    poles: Sequence[Tuple[object, object]],
    eps: float,
    ubar0: Optional[object] = None,
    poles_bar: Optional[Sequence[Tuple[object, object]]] = None,
    real_structure: bool = False,
    physical: bool = False,
) -> LogMapPair:
    """Logarithmic map whose branch points pair up at distance eps*u_i around each pole.

    a_{2i-1} = 1/eps, a_{2i} = -1/eps, w_{2i} = w_{2i-1} + eps*u_i; same on the barred side.
    As eps -> 0 the map tends to ``rational_limit`` of the same data.
    """
    if eps <= 0:
        raise InvalidMap("eps must be positive")
    inv = Fraction(1) / _exact_real(float(eps))

    def pairs(data: Sequence[Tuple[object, object]]) -> List[Tuple[ExactCharge, complex]]:
        out: List[Tuple[ExactCharge, complex]] = []
        for u, w in data:
            u_c, w_c = as_complex(u), as_complex(w)
            out.append(((inv, Fraction(0)), w_c))
            out.append(((-inv, Fraction(0)), w_c + eps * u_c))
        return out

    if poles_bar is None or ubar0 is None:
        if not real_structure:
            raise InvalidMap("barred data is required without the real structure")
        ubar0 = as_complex(u0).conjugate()
        poles_bar = [(as_complex(u).conjugate(), as_complex(w).conjugate()) for u, w in poles]
    return LogMapPair(r, u0, pairs(poles), ubar0, pairs(poles_bar), real_structure=real_structure, physical=physical)


def rational_limit(log_map: LogMapPair) -> RationalMapPair:
    """The eps -> 0 target of a map produced by ``coalesce`` (pairs read back from the branch data)."""

    def unpair(half: LogHalf) -> Tuple[complex, List[Tuple[complex, complex]]]:
        if half.n_branch % 2:
            raise InvalidMap("rational limit needs the branch points in pairs")
        poles = []
        for i in range(0, half.n_branch, 2):
            a = half.a[i]
            if half.a[i + 1] != -a or a == 0:
                raise InvalidMap("branch pair charges must be (1/eps, -1/eps)")
            eps = 1.0 / a
            poles.append(((half.p[i + 1] - half.p[i]) / eps, half.p[i]))
        return half.u, poles

    u0, poles = unpair(log_map.z_half)  # type: ignore[arg-type]
    ubar0, poles_bar = unpair(log_map.zbar_half)  # type: ignore[arg-type]
    return RationalMapPair(
        log_map.r, u0, poles, ubar0, poles_bar, real_structure=log_map.real_structure, physical=log_map.physical
    )
