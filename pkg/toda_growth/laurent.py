"""Finite Laurent series in the formal variable w and the Lax-Poisson bracket.

A ``LaurentSeries`` stores the coefficients of the exponents ``lo..hi``.  All
arithmetic is exact on the windows it produces; nothing is dropped unless
``truncate`` is called.  ``truncated=True`` marks a window cut out of an
infinite series, which the power routines use to refuse uncertified requests.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Literal, Sequence, Tuple, Union

import numpy as np

from .errors import NonInvertibleLeading, WindowTooWide, ZeroArgument

logger = logging.getLogger(__name__)

Part = Literal["plus", "minus", "zero"]
Scalar = Union[int, float, complex]


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    lo: int
    coeffs: np.ndarray
    truncated: bool = False

    def __post_init__(self) -> None:
        data = np.array(self.coeffs, dtype=np.complex128).reshape(-1)
        if data.size == 0:
            data = np.zeros(1, dtype=np.complex128)
        if not np.all(np.isfinite(data)):
            raise ValueError("Laurent coefficients must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "coeffs", data)
        object.__setattr__(self, "lo", int(self.lo))

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls) -> "LaurentSeries":
        return cls(0, [0.0])

    @classmethod
    def constant(cls, value: Scalar) -> "LaurentSeries":
        return cls(0, [value])

    @classmethod
    def monomial(cls, exponent: int, value: Scalar = 1.0) -> "LaurentSeries":
        return cls(exponent, [value])

    @classmethod
    def from_dict(cls, terms: Dict[int, Scalar], truncated: bool = False) -> "LaurentSeries":
        if not terms:
            return cls.zero()
        lo, hi = min(terms), max(terms)
        data = np.zeros(hi - lo + 1, dtype=np.complex128)
        for exponent, value in terms.items():
            data[exponent - lo] += value
        return cls(lo, data, truncated)

    # window -------------------------------------------------------------
    @property
    def hi(self) -> int:
        return self.lo + self.coeffs.size - 1

    @property
    def exponents(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def coeff(self, exponent: int) -> complex:
        if exponent < self.lo or exponent > self.hi:
            return 0j
        return complex(self.coeffs[exponent - self.lo])

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients for exponents lo..hi, zero outside the stored window."""
        return np.array([self.coeff(k) for k in range(lo, hi + 1)], dtype=np.complex128)

    def to_dict(self) -> Dict[int, complex]:
        return {int(k): complex(c) for k, c in zip(self.exponents, self.coeffs) if c != 0}

    def trim(self) -> "LaurentSeries":
        nonzero = np.flatnonzero(self.coeffs != 0)
        if nonzero.size == 0:
            return LaurentSeries(0, [0.0], self.truncated)
        first, last = nonzero[0], nonzero[-1]
        return LaurentSeries(self.lo + int(first), self.coeffs[first : last + 1], self.truncated)

    def truncate(self, lo: int, hi: int) -> "LaurentSeries":
        if lo > self.lo or hi < self.hi:
            logger.debug("truncating series window [%d, %d] to [%d, %d]", self.lo, self.hi, lo, hi)
        dropped = lo > self.lo or hi < self.hi
        return LaurentSeries(lo, self.window(lo, hi), self.truncated or dropped)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    # algebra ------------------------------------------------------------
    def __add__(self, other: Union["LaurentSeries", Scalar]) -> "LaurentSeries":
        other = _coerce(other)
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        return LaurentSeries(lo, self.window(lo, hi) + other.window(lo, hi), self.truncated or other.truncated)

    __radd__ = __add__

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(self.lo, -self.coeffs, self.truncated)

    def __sub__(self, other: Union["LaurentSeries", Scalar]) -> "LaurentSeries":
        return self + (-_coerce(other))

    def __rsub__(self, other: Scalar) -> "LaurentSeries":
        return _coerce(other) - self

    def __mul__(self, other: Union["LaurentSeries", Scalar]) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            return LaurentSeries(self.lo, self.coeffs * complex(other), self.truncated)
        return LaurentSeries(
            self.lo + other.lo,
            np.convolve(self.coeffs, other.coeffs),
            self.truncated or other.truncated,
        )

    __rmul__ = __mul__

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by w**k."""
        return LaurentSeries(self.lo + k, self.coeffs, self.truncated)

    def reflect(self) -> "LaurentSeries":
        """Substitute w -> 1/w."""
        return LaurentSeries(-self.hi, self.coeffs[::-1], self.truncated)

    def project(self, part: Part) -> "LaurentSeries":
        terms = self.to_dict()
        if part == "plus":
            kept = {k: c for k, c in terms.items() if k > 0}
        elif part == "minus":
            kept = {k: c for k, c in terms.items() if k < 0}
        elif part == "zero":
            kept = {k: c for k, c in terms.items() if k == 0}
        else:
            raise ValueError(f"unknown projection {part!r}")
        return LaurentSeries.from_dict(kept)

    def deriv_w(self) -> "LaurentSeries":
        return LaurentSeries(self.lo - 1, self.coeffs * self.exponents, self.truncated)

    def evaluate(self, w: Union[Scalar, np.ndarray]) -> Union[complex, np.ndarray]:
        arr = np.asarray(w, dtype=np.complex128)
        if self.lo < 0 and np.any(arr == 0):
            raise ZeroArgument("series with negative exponents evaluated at w = 0")
        total = np.zeros_like(arr)
        # nonnegative exponents: Horner in w
        if self.hi >= 0:
            for k in range(self.hi, max(self.lo, 0) - 1, -1):
                total = total * arr + self.coeff(k)
            if self.lo > 0:
                total = total * arr ** self.lo
        # negative exponents: Horner in 1/w
        if self.lo < 0:
            inv = 1.0 / arr
            tail = np.zeros_like(arr)
            for k in range(self.lo, min(self.hi, -1) + 1):
                tail = tail * inv + self.coeff(k)
            top = min(self.hi, -1)
            total = total + tail * inv ** (-top)
        if np.ndim(w) == 0:
            return complex(total)
        return total


def _coerce(value: Union[LaurentSeries, Scalar]) -> LaurentSeries:
    if isinstance(value, LaurentSeries):
        return value
    return LaurentSeries.constant(value)


def ls_add(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    return a + b


def ls_mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    return a * b


def ls_project(f: LaurentSeries, part: Part) -> LaurentSeries:
    return f.project(part)


def ls_deriv_w(f: LaurentSeries) -> LaurentSeries:
    return f.deriv_w()


def ls_eval(f: LaurentSeries, w: Union[Scalar, np.ndarray]) -> Union[complex, np.ndarray]:
    return f.evaluate(w)


def lax_bracket(f: LaurentSeries, f_x: LaurentSeries, g: LaurentSeries, g_x: LaurentSeries) -> LaurentSeries:
    """{f, g} = w (f_w g_x - f_x g_w) with caller-supplied x-derivatives."""
    return (f.deriv_w() * g_x - f_x * g.deriv_w()).shift(1)


def max_abs_diff(a: LaurentSeries, b: LaurentSeries) -> float:
    lo, hi = min(a.lo, b.lo), max(a.hi, b.hi)
    return float(np.max(np.abs(a.window(lo, hi) - b.window(lo, hi))))


def power_at_infinity(f: LaurentSeries, p: int, depth: int) -> LaurentSeries:
    """f**p expanded about w = infinity, exact for exponents p*hi .. p*hi - depth.

    Uses the J.C.P. Miller recurrence on f = c w**hi (1 + s(1/w)).
    """
    f = f.trim()
    lead = f.coeff(f.hi)
    if lead == 0:
        raise NonInvertibleLeading("series has no nonzero leading coefficient")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if f.truncated and f.hi - depth < f.lo:
        raise WindowTooWide(
            f"need coefficients down to w^{f.hi - depth}, series certified only to w^{f.lo}"
        )
    s = np.array([f.coeff(f.hi - j) / lead for j in range(depth + 1)], dtype=np.complex128)
    g = np.zeros(depth + 1, dtype=np.complex128)
    g[0] = 1.0
    for n in range(1, depth + 1):
        j = np.arange(1, n + 1)
        g[n] = np.sum(((p + 1) * j - n) * s[j] * g[n - j]) / n
    top = p * f.hi
    exact = p >= 0 and not f.truncated and depth >= p * (f.hi - f.lo)
    return LaurentSeries(top - depth, (lead ** p) * g[::-1], truncated=not exact)


def power_at_zero(f: LaurentSeries, p: int, depth: int) -> LaurentSeries:
    """Mirror of ``power_at_infinity`` about w = 0 (expansion in w)."""
    return power_at_infinity(f.reflect(), p, depth).reflect()


class XLaurent:
    """Polynomial in x with Laurent-series coefficients in w.

    ``terms[b]`` is the coefficient of x**b.  Derivatives in both variables are
    exact, so nested brackets of this class can be compared coefficient-wise.
    """

    def __init__(self, terms: Sequence[LaurentSeries]) -> None:
        self.terms: Tuple[LaurentSeries, ...] = tuple(terms) if terms else (LaurentSeries.zero(),)

    @classmethod
    def monomial(cls, value: Scalar, w_power: int, x_power: int) -> "XLaurent":
        terms = [LaurentSeries.zero()] * x_power + [LaurentSeries.monomial(w_power, value)]
        return cls(terms)

    @classmethod
    def from_series(cls, series: LaurentSeries) -> "XLaurent":
        return cls([series])

    def __add__(self, other: "XLaurent") -> "XLaurent":
        size = max(len(self.terms), len(other.terms))
        return XLaurent([self._term(b) + other._term(b) for b in range(size)])

    def __neg__(self) -> "XLaurent":
        return XLaurent([-t for t in self.terms])

    def __sub__(self, other: "XLaurent") -> "XLaurent":
        return self + (-other)

    def __mul__(self, other: Union["XLaurent", Scalar]) -> "XLaurent":
        if not isinstance(other, XLaurent):
            return XLaurent([t * other for t in self.terms])
        out = [LaurentSeries.zero()] * (len(self.terms) + len(other.terms) - 1)
        for i, a in enumerate(self.terms):
            for j, b in enumerate(other.terms):
                out[i + j] = out[i + j] + a * b
        return XLaurent(out)

    __rmul__ = __mul__

    def _term(self, b: int) -> LaurentSeries:
        return self.terms[b] if b < len(self.terms) else LaurentSeries.zero()

    def deriv_x(self) -> "XLaurent":
        return XLaurent([t * b for b, t in enumerate(self.terms)][1:])

    def deriv_w(self) -> "XLaurent":
        return XLaurent([t.deriv_w() for t in self.terms])

    def shift(self, k: int) -> "XLaurent":
        return XLaurent([t.shift(k) for t in self.terms])

    def project(self, part: Part) -> "XLaurent":
        return XLaurent([t.project(part) for t in self.terms])

    def power(self, n: int) -> "XLaurent":
        out = XLaurent([LaurentSeries.constant(1.0)])
        for _ in range(n):
            out = out * self
        return out

    def norm(self) -> float:
        return float(np.sqrt(sum(t.norm() ** 2 for t in self.terms)))


def xlaurent_bracket(f: XLaurent, g: XLaurent) -> XLaurent:
    """{f, g} = w (f_w g_x - f_x g_w) on the bivariate class."""
    return (f.deriv_w() * g.deriv_x() - f.deriv_x() * g.deriv_w()).shift(1)


def jacobi_cyclic_sum(f: XLaurent, g: XLaurent, h: XLaurent) -> XLaurent:
    return (
        xlaurent_bracket(f, xlaurent_bracket(g, h))
        + xlaurent_bracket(g, xlaurent_bracket(h, f))
        + xlaurent_bracket(h, xlaurent_bracket(f, g))
    )


def hamiltonian_projection(power: Union[LaurentSeries, XLaurent]) -> Union[LaurentSeries, XLaurent]:
    """(f)_+ + 1/2 (f)_0, the projection defining the Toda evolution functions."""
    return power.project("plus") + power.project("zero") * 0.5


def zero_curvature_defect(z: XLaurent, i: int, j: int) -> float:
    """Coefficient norm of d_{t_j}H_i - d_{t_i}H_j - {H_j, H_i} for an unreduced state.

    Time derivatives are taken along dz/dt_k = {H_k, z}; the derivative of z**i
    along that direction is i z**(i-1) {H_k, z}, so everything is exact.
    """
    h_i = hamiltonian_projection(z.power(i))
    h_j = hamiltonian_projection(z.power(j))
    dz_j = xlaurent_bracket(h_j, z)
    dz_i = xlaurent_bracket(h_i, z)
    d_j_hi = hamiltonian_projection(z.power(i - 1) * dz_j * i)
    d_i_hj = hamiltonian_projection(z.power(j - 1) * dz_i * j)
    defect = d_j_hi - d_i_hj - xlaurent_bracket(h_j, h_i)
    return defect.norm()


def series_from_terms(terms: Iterable[Tuple[int, Scalar]]) -> LaurentSeries:
    acc: Dict[int, complex] = {}
    for exponent, value in terms:
        acc[exponent] = acc.get(exponent, 0j) + complex(value)
    return LaurentSeries.from_dict(acc)
