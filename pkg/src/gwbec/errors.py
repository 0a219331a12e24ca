"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1,
runtime failures exit 2, violated physics invariants exit 3.
"""

from __future__ import annotations


class GwbecError(Exception):
    """Base class for all package errors."""


class ConfigValidationError(GwbecError):
    """A scenario config failed validation; carries the full error list."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class EvolutionAbort(GwbecError):
    """Time evolution hit NaN/Inf; carries the last finite state."""

    def __init__(self, step: int, message: str, last_state=None):
        self.step = step
        self.last_state = last_state
        super().__init__(f"evolution aborted at step {step}: {message}")


class InvariantViolation(GwbecError):
    """A hard physics invariant failed (e.g. a phase shift exceeding its bound)."""
