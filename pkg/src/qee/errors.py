"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class QEEError(Exception):
    """Base class for all library errors."""


class DimensionError(QEEError, ValueError):
    """A matrix or index has the wrong shape or exceeds the configured size."""


class ContractError(QEEError, ValueError):
    """An input violates a documented precondition (Hermiticity, trace, ...)."""


class InconsistencyError(QEEError, RuntimeError):
    """Independent entanglement tests disagreed on the same input.

    ``details`` carries every raw value that went into the decision so the
    failure can be reproduced.
    """

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = dict(details or {})
