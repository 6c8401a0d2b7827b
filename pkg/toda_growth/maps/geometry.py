"""Boundary sampling and shape diagnostics on the unit circle."""
from __future__ import annotations

import numpy as np

from ..errors import SingularPoint
from .base import MapPair

ON_CIRCLE_TOL = 1e-10


def unit_circle(m: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(m) / m)


def _check_circle_clear(pair: MapPair) -> None:
    sing = np.concatenate([pair.z_singularities(), pair.zbar_singularities()])
    if sing.size and np.any(np.abs(np.abs(sing) - 1.0) < ON_CIRCLE_TOL):
        raise SingularPoint("a pole or branch point lies on the unit circle")


def boundary_samples(pair: MapPair, m: int) -> np.ndarray:
    """z(exp(2 pi i k/m)) for k = 0..m-1."""
    if m < 8 or m & (m - 1):
        raise ValueError("boundary_samples needs a power of two m >= 8")
    _check_circle_clear(pair)
    return pair.eval_z(unit_circle(m))


def univalence_margin(pair: MapPair, m: int = 64) -> float:
    """min(|z_w|/|r| on the circle, clearance of the singular points from |w| >= 1)."""
    if m < 64:
        raise ValueError("univalence_margin needs m >= 64")
    w = unit_circle(m)
    derivative = float(np.min(np.abs(pair.z_w(w)))) / abs(pair.r)
    sing = pair.z_singularities()
    clearance = 1.0 - float(np.max(np.abs(sing))) if sing.size else 1.0
    return min(derivative, clearance)


def enclosed_area(pair: MapPair, m: int = 256) -> float:
    """Area inside the image of the unit circle, 1/2 of the integral of Im(conj(z) dz)."""
    w = unit_circle(m)
    z = pair.eval_z(w)
    z_phi = 1j * w * pair.z_w(w)
    return float(np.pi * np.mean(np.imag(np.conj(z) * z_phi)))
