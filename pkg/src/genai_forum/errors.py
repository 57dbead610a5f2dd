"""Exception hierarchy. The CLI maps each class to an exit code."""

from __future__ import annotations


class GenAIForumError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class RangeError(GenAIForumError, ValueError):
    """A round index or proportion lies outside its domain."""


class ShapeError(GenAIForumError, ValueError):
    """Scheme length does not match the instance horizon."""


class ParameterError(GenAIForumError, ValueError):
    """An algorithm parameter (eps, k, tolerance, ...) is invalid."""


class ValidationError(GenAIForumError, ValueError):
    """An instance or utility function violates a model invariant."""


class CapacityError(GenAIForumError):
    exit_code = 4


class ConvergenceError(GenAIForumError):
    exit_code = 5


class EligibilityError(GenAIForumError):
    """A contraction-based guarantee does not apply to the instance.

    ``reason`` is one of the machine-readable codes below.
    """

    exit_code = 3

    NOT_LIPSCHITZ_ZERO_AT_ONE = "NOT_LIPSCHITZ_ZERO_AT_ONE"
    BETA_L_TOO_LARGE = "BETA_L_TOO_LARGE"
    EPS_TOO_LARGE = "EPS_TOO_LARGE"

    def __init__(self, reason: str, message: str):
        super().__init__(f"{reason}: {message}")
        self.reason = reason


class ConfigError(GenAIForumError):
    """Config text could not be parsed or validated."""

    exit_code = 2

    UNKNOWN_KEY = "UNKNOWN_KEY"
    MISSING_KEY = "MISSING_KEY"
    DUPLICATE_KEY = "DUPLICATE_KEY"
    SYNTAX = "SYNTAX"
    TYPE_MISMATCH = "TYPE_MISMATCH"
    INVALID_INSTANCE = "INVALID_INSTANCE"

    def __init__(self, code: str, message: str, line: int | None = None, key: str | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{code}: {where}{message}")
        self.code = code
        self.line = line
        self.key = key
