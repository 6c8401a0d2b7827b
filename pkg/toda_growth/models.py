"""Core dataclasses shared by the solvers, the runner and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, List, Literal, Optional

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .maps.base import MapPair

FunctionKind = Literal["standard", "logarithmic", "rational_krichever"]


@dataclass(frozen=True)
class EvolutionState:
    """A reduced map at physical time x."""

    map: "MapPair"
    x: float


@dataclass(frozen=True)
class ParamTangent:
    """d/dx (or d/dtau) of every dynamical parameter, in the map's parameter order."""

    values: np.ndarray
    labels: List[str] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class ConservedSet:
    """Casimir offset plus moments (polynomial) or action variables (rational, logarithmic)."""

    c0: complex
    c: List[complex]
    cbar: List[complex]
    kind: Literal["moments", "actions"]

    def as_vector(self) -> np.ndarray:
        return np.array([self.c0, *self.c, *self.cbar], dtype=np.complex128)

    def labels(self) -> List[str]:
        if self.kind == "moments":
            names = [f"M_{k + 1}" for k in range(len(self.c))]
            bars = [f"Mbar_{k + 1}" for k in range(len(self.cbar))]
        else:
            names = [f"I_{k}" for k in range(len(self.c))]
            bars = [f"Ibar_{k}" for k in range(len(self.cbar))]
        return ["Q-x", *names, *bars]


@dataclass(frozen=True)
class EvolutionFunction:
    """Which evolution function drives a flow."""

    kind: FunctionKind
    index: int
    barred: bool = False

    @property
    def label(self) -> str:
        stem = {"standard": "H", "logarithmic": "Hlog", "rational_krichever": "h"}[self.kind]
        return f"{stem}{'bar' if self.barred else ''}_{self.index}"


@dataclass(frozen=True)
class FlowSpec:
    function: EvolutionFunction
    delta: float = 1e-3
    steps: int = 1

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError("FlowSpec.steps must be >= 1")


@dataclass
class LeakageReport:
    """Split of a flow's action on (z, zbar) into the part the ansatz can absorb and the rest."""

    allowed_norm: float
    leak_norm: float
    breakdown: Dict[int, float] = field(default_factory=dict)


@dataclass
class MomentVector:
    k_max: int
    M: List[complex]
    Mbar: List[complex]
    Q: complex


@dataclass
class ActionVector:
    I: List[complex]
    Ibar: List[complex]
    Q: complex


@dataclass
class NumericSummary:
    count: int
    average: Optional[float]
    median: Optional[float]
    minimum: Optional[float]
    maximum: Optional[float]


@dataclass
class DriftSummary:
    """Drift of one tracked quantity along a trajectory."""

    name: str
    count: int
    initial: Optional[complex]
    max_drift: Optional[float]
    mean_drift: Optional[float]


@dataclass
class CheckResult:
    """One line of the verify battery."""

    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""


@dataclass
class RunManifest:
    command: str
    version: str
    config: Dict[str, Any]
    exit_code: int = 0
    error: Optional[str] = None
    phases: Dict[str, float] = field(default_factory=dict)
    residuals: Dict[str, Any] = field(default_factory=dict)
    drift: List[Dict[str, Any]] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)
