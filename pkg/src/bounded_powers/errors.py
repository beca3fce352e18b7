from __future__ import annotations

from enum import IntEnum, unique


@unique
class ExitCode(IntEnum):
    SUCCESS = 0
    PROPERTY_FAILURE = 1
    INPUT_ERROR = 2
    RESOURCE_CAP = 3


class LabError(Exception):
    """Base class for every error raised by this package."""

    exit_code = ExitCode.INPUT_ERROR


class InputError(LabError, ValueError):
    """Raised for malformed input or a violated precondition."""

    exit_code = ExitCode.INPUT_ERROR


class ResourceCapError(LabError, RuntimeError):
    """Raised when a computation would exceed a configured cap."""

    exit_code = ExitCode.RESOURCE_CAP

    def __init__(self, what: str, *, size: int, cap: int) -> None:
        super().__init__(f"{what}: {size} exceeds the cap of {cap}")
        self.size = size
        self.cap = cap


class PropertyViolationError(LabError, AssertionError):
    """Raised when a statement that must hold is observed to fail."""

    exit_code = ExitCode.PROPERTY_FAILURE
