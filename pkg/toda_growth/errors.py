"""Exception hierarchy shared by the numerics and the CLI."""
from __future__ import annotations


class TodaGrowthError(Exception):
    """Base error; ``exit_code`` is what the CLI returns for it."""

    exit_code: int = 1


class ConfigError(TodaGrowthError):
    exit_code = 2

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


class InvalidMap(TodaGrowthError):
    exit_code = 2


class ZeroArgument(TodaGrowthError):
    pass


class WindowTooWide(TodaGrowthError):
    pass


class NonInvertibleLeading(TodaGrowthError):
    pass


class SingularPoint(TodaGrowthError):
    exit_code = 3


class ContourThroughPole(TodaGrowthError):
    exit_code = 3


class CuspDetected(TodaGrowthError):
    exit_code = 3


class DegenerateConfiguration(TodaGrowthError):
    exit_code = 4


class DegenerateJacobian(TodaGrowthError):
    exit_code = 4


class DegenerateTangent(TodaGrowthError):
    exit_code = 4


class NoConvergence(TodaGrowthError):
    exit_code = 4


class FormInvarianceViolated(TodaGrowthError):
    exit_code = 5

    def __init__(self, message: str, leak_norm: float) -> None:
        super().__init__(message)
        self.leak_norm = leak_norm


class IndexRangeViolation(TodaGrowthError):
    exit_code = 2
