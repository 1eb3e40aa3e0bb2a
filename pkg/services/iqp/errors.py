"""
Exception hierarchy for the IQP toolkit.

Each exception class carries the CLI exit code it maps to, so command
handlers can let library errors propagate and `cli.run` translates them.
"""

from typing import Optional

EXIT_ACCEPT = 0
EXIT_REJECT = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3
EXIT_INFEASIBLE = 4


class IQPError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = EXIT_USAGE


class FormatError(IQPError, ValueError):
    """Malformed matrix, program, secret, transcript, network or graph text."""


class ParameterError(IQPError, ValueError):
    """Invalid parameter value (bad q, theta mismatch, length mismatch...)."""


class UsageError(IQPError):
    """Command-line usage error raised by the argument parser."""


class InfeasibleSizeError(IQPError, RuntimeError):
    """A computation would exceed a configured size cap."""

    exit_code = EXIT_INFEASIBLE

    def __init__(self, quantity: str, value: int, cap: int, message: Optional[str] = None):
        self.quantity = quantity
        self.value = value
        self.cap = cap
        super().__init__(message or f"{quantity}={value} exceeds cap {cap}: computation infeasible")
