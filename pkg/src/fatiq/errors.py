"""Exception types shared across the library."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SequenceExhausted(RuntimeError):
    """A severity sequence ended before the failure condition was reached.

    Carries the state reached at the end of the sequence so callers can
    decide whether to extend the loading history.
    """

    def __init__(self, message: str, *, final_damage=None, residual_health=None):
        super().__init__(message)
        self.final_damage = final_damage
        self.residual_health = residual_health


class GridTooShort(RuntimeError):
    """A survival curve never crosses the requested probability level."""

    def __init__(self, message: str, *, last_value=None):
        super().__init__(message)
        self.last_value = last_value


class HotPointStructureError(RuntimeError):
    """The severity field does not show the expected hot-point structure."""


class ConfigError(ValueError):
    """A configuration file is missing, malformed, or violates an invariant."""
