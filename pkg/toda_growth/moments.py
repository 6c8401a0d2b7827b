"""Harmonic moments, the Casimir Q and the action variables.

Closed forms and independent contour integrals of the same quantities live
side by side; the contour versions exist so the two can be compared.
"""
from __future__ import annotations

import logging
from typing import List

import numpy as np

from .errors import ContourThroughPole, IndexRangeViolation, SingularPoint
from .laurent import power_at_infinity
from .maps import LogMapPair, MapPair, PolyMapPair, RationalMapPair
from .models import ActionVector, MomentVector
from .quadrature import contour_integral, trapezoid_contour

logger = logging.getLogger(__name__)

ZERO_TOL = 1e-12


# moments ------------------------------------------------------------------
def moment_Mk(pair: MapPair, k: int) -> complex:
    """M_k = (1/k) res_inf zbar z^-k dz.

    Exact Laurent arithmetic for polynomial maps; otherwise the same residue is
    the contour integral over a circle in the common annulus of analyticity.
    """
    if k < 1:
        raise IndexRangeViolation("moment index must be >= 1")
    if isinstance(pair, PolyMapPair):
        z = pair.expand_z_at_infinity(0)
        zbar = pair.expand_zbar_at_zero(0)
        inverse = power_at_infinity(z, -k, pair.order + 1)
        return (zbar * inverse * z.deriv_w()).coeff(-1) / k
    return _moment_contour(pair, k, pair.collocation_radius())


def moment_Mbar_k(pair: MapPair, k: int) -> complex:
    """Mirror of ``moment_Mk`` about w = 0, positively oriented in y = 1/w."""
    return moment_Mk(pair.swapped(), k)


def _moment_contour(pair: MapPair, k: int, radius: float) -> complex:
    def integrand(w: np.ndarray) -> np.ndarray:
        z = pair.eval_z(w)
        if np.min(np.abs(z)) < ZERO_TOL:
            raise ContourThroughPole("z vanishes on the moment contour")
        return pair.eval_zbar(w) * z ** (-k) * pair.z_w(w) / k

    return complex(contour_integral(integrand, 0.0, radius))


def richardson_moments(pair: MapPair, k: int, m: int) -> complex:
    """(1/2 pi i k) of the integral of zbar z^-k dz over |w| = 1, plain m-node trapezoid."""
    if k < 1:
        raise IndexRangeViolation("moment index must be >= 1")

    def integrand(w: np.ndarray) -> np.ndarray:
        return pair.eval_zbar(w) * pair.eval_z(w) ** (-k) * pair.z_w(w) / k

    return complex(trapezoid_contour(integrand, 0.0, 1.0, m))


def moments(pair: MapPair, k_max: int) -> MomentVector:
    return MomentVector(
        k_max=k_max,
        M=[moment_Mk(pair, k) for k in range(1, k_max + 1)],
        Mbar=[moment_Mbar_k(pair, k) for k in range(1, k_max + 1)],
        Q=casimir_Q(pair),
    )


# actions ------------------------------------------------------------------
def action_count(pair: MapPair) -> int:
    """Number of unbarred actions I_0 .. I_{count-1}."""
    if isinstance(pair, LogMapPair):
        return pair.n + 2
    if isinstance(pair, RationalMapPair):
        return 2 * pair.n_poles + 1
    raise IndexRangeViolation(f"{pair.kind} maps carry moments, not actions")


def pole_type_indices(pair: MapPair) -> List[int]:
    """Actions attached to a pole of z dz (they enter Q and the area)."""
    if isinstance(pair, LogMapPair):
        return list(range(1, pair.n + 2))
    if isinstance(pair, RationalMapPair):
        return [2 * i for i in range(1, pair.n_poles + 1)]
    return []


def action_I(pair: MapPair, j: int) -> complex:
    if j < 0 or j >= action_count(pair):
        raise IndexRangeViolation(f"action index {j} out of range for {pair.kind}")
    bar = pair.zbar_half
    if j == 0:
        return bar.value_at_origin()
    if isinstance(pair, LogMapPair):
        a, p = pair.z_half.a[j - 1], pair.z_half.p[j - 1]  # type: ignore[attr-defined]
        return complex(a * _clear_value(bar, 1.0 / p))
    i = (j + 1) // 2 - 1
    c, p = pair.z_half.c[i], pair.z_half.p[i]  # type: ignore[attr-defined]
    if j % 2:
        return complex(_clear_value(bar, 1.0 / p))
    return complex(c * bar.deriv(np.asarray(1.0 / p)) / p ** 2)


def action_Ibar(pair: MapPair, j: int) -> complex:
    return action_I(pair.swapped(), j)


def _clear_value(half, s: complex) -> complex:
    half.check_clear(np.asarray([s]))
    return complex(half.value(np.asarray(s)))


def actions(pair: MapPair) -> ActionVector:
    count = action_count(pair)
    return ActionVector(
        I=[action_I(pair, j) for j in range(count)],
        Ibar=[action_Ibar(pair, j) for j in range(count)],
        Q=casimir_Q(pair),
    )


def action_contour(pair: MapPair, j: int) -> complex:
    """The defining contour integral of I_j, independent of the closed form."""
    if j < 0 or j >= action_count(pair):
        raise IndexRangeViolation(f"action index {j} out of range for {pair.kind}")
    if j == 0:
        return _action_zero_contour(pair)
    if isinstance(pair, LogMapPair):
        center = pair.z_half.p[j - 1]  # type: ignore[attr-defined]
        return complex(contour_integral(lambda w: pair.eval_zbar(w) * pair.z_w(w), center, _clearance(pair, center)))
    i = (j + 1) // 2 - 1
    c, center = pair.z_half.c[i], pair.z_half.p[i]  # type: ignore[attr-defined]
    radius = _clearance(pair, center)
    if j % 2:
        return complex(contour_integral(lambda w: pair.eval_zbar(w) * pair.eval_z(w), center, radius)) / c
    return complex(contour_integral(lambda w: pair.eval_zbar(w) * pair.z_w(w), center, radius))


def _clearance(pair: MapPair, center: complex) -> float:
    others = [0j, *pair.z_singularities(), *pair.zbar_singularities()]
    distances = [abs(center - o) for o in others if o != center]
    return 0.4 * min(distances)


def _action_zero_contour(pair: MapPair) -> complex:
    """res_inf of zbar dz/z, with zbar on its branch analytic around w = infinity."""
    bar_sing = pair.zbar_half.singularities()
    z_sing = pair.z_singularities()
    scale = abs(complex(pair.z_half.own_params[0])) / abs(pair.r)
    if isinstance(pair, LogMapPair):
        scale += float(np.sum(np.abs(pair.z_half.a * pair.z_half.p))) / abs(pair.r)  # type: ignore[attr-defined]
    else:
        scale += float(np.sum(np.abs(pair.z_half.c))) / abs(pair.r)  # type: ignore[attr-defined]
    radius = max(8.0, 4.0 / float(np.min(np.abs(bar_sing))), 4.0 * float(np.max(np.abs(z_sing))), 4.0 * scale)

    def integrand(w: np.ndarray) -> np.ndarray:
        z = pair.eval_z(w)
        return pair.zbar_half.value_near_origin(1.0 / w) * pair.z_w(w) / z

    return complex(contour_integral(integrand, 0.0, radius))


# Casimir ------------------------------------------------------------------
def casimir_Q(pair: MapPair) -> complex:
    if isinstance(pair, PolyMapPair):
        z = pair.expand_z_at_infinity(0)
        return (pair.expand_zbar_at_zero(0) * z.deriv_w()).coeff(-1)
    r = pair.r
    total = r * r
    if isinstance(pair, LogMapPair):
        a, p = pair.z_half.a, pair.z_half.p  # type: ignore[attr-defined]
        abar, pbar = pair.zbar_half.a, pair.zbar_half.p  # type: ignore[attr-defined]
        for j in range(1, pair.n + 2):
            geometric = r * (a[j - 1] / p[j - 1] + abar[j - 1] / pbar[j - 1])
            total -= 0.5 * (geometric + action_I(pair, j) + action_Ibar(pair, j))
        return complex(total)
    if isinstance(pair, RationalMapPair):
        c, p = pair.z_half.c, pair.z_half.p  # type: ignore[attr-defined]
        cbar, pbar = pair.zbar_half.c, pair.zbar_half.p  # type: ignore[attr-defined]
        for i in range(1, pair.n_poles + 1):
            geometric = r * (c[i - 1] / p[i - 1] ** 2 + cbar[i - 1] / pbar[i - 1] ** 2)
            total -= 0.5 * (geometric + action_I(pair, 2 * i) + action_Ibar(pair, 2 * i))
        return complex(total)
    raise SingularPoint(f"no Casimir for {type(pair).__name__}")


def casimir_contour(pair: MapPair) -> complex:
    """(1/2 pi i) of the integral of zbar dz on the collocation circle, minus the pole-type actions."""
    radius = pair.collocation_radius()
    loop = complex(contour_integral(lambda w: pair.eval_zbar(w) * pair.z_w(w), 0.0, radius))
    for j in pole_type_indices(pair):
        loop -= action_I(pair, j) + action_Ibar(pair, j)
    return loop


def area_over_pi(pair: MapPair) -> complex:
    """Q plus the pole-type actions; equals area/pi for physical real maps."""
    total = casimir_Q(pair)
    for j in pole_type_indices(pair):
        total += action_I(pair, j) + action_Ibar(pair, j)
    return total
