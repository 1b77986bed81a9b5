"""Exception hierarchy shared by the engine, parser, builders and CLI."""

from __future__ import annotations


class QsimError(Exception):
    """Base class for all package errors."""


class DomainError(QsimError, ValueError):
    """An argument lies outside the operation's domain (bad index, length, name...)."""


class CapacityError(QsimError):
    """The request exceeds a configured size cap (qubits, dense dimension)."""


class UnsupportedInstructionError(QsimError):
    """An instruction kind cannot be handled by the requested operation."""


class UnsupportedExportError(QsimError):
    """A circuit holds instructions with no OpenQASM spelling (dense operators)."""


class ValidationError(QsimError):
    """A circuit failed validation.

    Attributes:
        violations: the list of :class:`qsim.circuit.Violation` found.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(str(v) for v in self.violations) or "invalid circuit"
        super().__init__(msg)


class FitError(QsimError):
    """Noise fitting could not bracket the requested target."""
