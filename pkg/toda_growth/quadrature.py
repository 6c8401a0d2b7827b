"""Self-validating trapezoid quadrature on circles."""
from __future__ import annotations

import logging
from typing import Callable, Optional, Union

import numpy as np

from .config import get_settings

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]


def circle_nodes(center: complex, radius: float, m: int) -> np.ndarray:
    return center + radius * np.exp(2j * np.pi * np.arange(m) / m)


def trapezoid_contour(f: Integrand, center: complex, radius: float, m: int) -> Union[complex, np.ndarray]:
    """(1/2 pi i) of the contour integral of f over the circle, m equispaced nodes.

    f may return an array with the nodes on the last axis.
    """
    w = circle_nodes(center, radius, m)
    values = np.asarray(f(w))
    return np.mean(values * (w - center), axis=-1)


def contour_integral(
    f: Integrand,
    center: complex = 0.0,
    radius: float = 1.0,
    start: Optional[int] = None,
    cap: Optional[int] = None,
    tol: Optional[float] = None,
) -> Union[complex, np.ndarray]:
    """Trapezoid rule with node doubling until successive values agree to ``tol``.

    Unset arguments come from the ``quadrature`` settings section. At the node cap
    the finest estimate is returned with a warning.
    """
    settings = get_settings().quadrature
    m = int(start if start is not None else settings.get("start_nodes", 64))
    cap = int(cap if cap is not None else settings.get("max_nodes", 2 ** 14))
    tol = float(tol if tol is not None else settings.get("tol", 1e-11))
    previous = trapezoid_contour(f, center, radius, m)
    while m < cap:
        m *= 2
        current = trapezoid_contour(f, center, radius, m)
        if np.max(np.abs(current - previous)) < tol:
            return current
        previous = current
    logger.warning("quadrature hit the node cap %d (radius %.3g) without reaching %.1e", cap, radius, tol)
    return previous


def laurent_coefficients(values: np.ndarray, radius: float, lo: int, hi: int) -> np.ndarray:
    """Laurent coefficients lo..hi of a function sampled on m equispaced nodes of |w| = radius."""
    m = values.shape[-1]
    spectrum = np.fft.fft(values, axis=-1) / m
    out = []
    for k in range(lo, hi + 1):
        out.append(spectrum[..., k % m] / radius ** k)
    return np.stack(out, axis=-1)
