"""Reduced conformal-map pairs and their plain-text records."""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Type

import numpy as np

from ..errors import InvalidMap
from .base import MapPair
from .geometry import boundary_samples, enclosed_area, univalence_margin
from .logarithmic import LogHalf, LogMapPair, coalesce, rational_limit
from .polynomial import PolyMapPair
from .rational import RationalMapPair

MAP_REGISTRY: Dict[str, Type[MapPair]] = {
    "polynomial": PolyMapPair,
    "rational": RationalMapPair,
    "logarithmic": LogMapPair,
}

__all__ = [
    "MAP_REGISTRY",
    "LogHalf",
    "LogMapPair",
    "MapPair",
    "PolyMapPair",
    "RationalMapPair",
    "boundary_samples",
    "build_map",
    "coalesce",
    "dump_record",
    "enclosed_area",
    "load_record",
    "rational_limit",
    "univalence_margin",
]


def order_of(pair: MapPair) -> int:
    if isinstance(pair, PolyMapPair):
        return pair.order
    if isinstance(pair, RationalMapPair):
        return pair.n_poles
    if isinstance(pair, LogMapPair):
        return pair.n
    raise InvalidMap(f"unknown map type {type(pair).__name__}")


def dump_record(pair: MapPair) -> str:
    """Plain-text record: header lines, one ``label re im`` line per parameter, charges as fractions."""
    lines = [
        f"kind {pair.kind}",
        f"order {order_of(pair)}",
        f"real_structure {int(pair.real_structure)}",
        f"physical {int(pair.physical)}",
    ]
    for label, value in zip(pair.param_labels(), pair.params()):
        lines.append(f"param {label} {float(value.real)!r} {float(value.imag)!r}")
    if isinstance(pair, LogMapPair):
        for side, half in (("a", pair.z_half), ("abar", pair.zbar_half)):
            for re, im in half.charges:  # type: ignore[attr-defined]
                lines.append(f"charge {side} {re} {im}")
    return "\n".join(lines) + "\n"


def load_record(text: str) -> MapPair:
    header: Dict[str, str] = {}
    values: List[complex] = []
    charges: Dict[str, List[tuple]] = {"a": [], "abar": []}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "param":
                values.append(complex(float(parts[2]), float(parts[3])))
            elif parts[0] == "charge":
                charges[parts[1]].append((Fraction(parts[2]), Fraction(parts[3])))
            else:
                header[parts[0]] = parts[1]
        except (IndexError, KeyError, ValueError) as exc:
            raise InvalidMap(f"record line {number}: cannot parse {raw!r}") from exc
    kind = header.get("kind")
    if kind not in MAP_REGISTRY:
        raise InvalidMap(f"record has unknown kind {kind!r}")
    order = int(header.get("order", "0"))
    real = header.get("real_structure", "0") == "1"
    physical = header.get("physical", "0") == "1"
    vec = np.array(values, dtype=np.complex128)
    r = vec[0]
    if kind == "polynomial":
        size = order + 1
        pair: MapPair = PolyMapPair(r, list(vec[1 : 1 + size]), list(vec[1 + size :]), physical=physical)
    elif kind == "rational":
        own = 1 + 2 * order
        z_own, b_own = vec[1 : 1 + own], vec[1 + own :]
        pair = RationalMapPair(
            r, z_own[0], list(zip(z_own[1::2], z_own[2::2])), b_own[0], list(zip(b_own[1::2], b_own[2::2])),
            physical=physical,
        )
    else:
        own = 2 + order
        z_own, b_own = vec[1 : 1 + own], vec[1 + own :]
        pair = LogMapPair(
            r, z_own[0], list(zip(charges["a"], z_own[1:])), b_own[0], list(zip(charges["abar"], b_own[1:])),
            physical=physical,
        )
    if vec.size != pair.dimension:
        raise InvalidMap(f"record has {vec.size} parameters, {kind} order {order} needs {pair.dimension}")
    return pair.with_flags(real_structure=real) if real else pair


def build_map(reduction: Dict[str, object]) -> MapPair:
    """Construct a pair from a validated ``reduction`` block of a run config."""
    kind = reduction.get("kind")
    cls = MAP_REGISTRY.get(str(kind))
    if cls is None:
        raise InvalidMap(f"unknown reduction kind {kind!r}")
    real = bool(reduction.get("real_structure", False))
    physical = bool(reduction.get("physical", False))
    if cls is PolyMapPair:
        return PolyMapPair(reduction["r"], reduction["u"], reduction.get("ubar"), real, physical)  # type: ignore[arg-type]
    if cls is RationalMapPair:
        return RationalMapPair(
            reduction["r"], reduction["u0"], reduction["poles"],  # type: ignore[arg-type]
            reduction.get("ubar0"), reduction.get("poles_bar"), real, physical,  # type: ignore[arg-type]
        )
    return LogMapPair(
        reduction["r"], reduction["u"], reduction["branch"],  # type: ignore[arg-type]
        reduction.get("ubar"), reduction.get("branch_bar"), real, physical,  # type: ignore[arg-type]
    )
