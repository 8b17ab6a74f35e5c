"""Exception types shared across the toolkit."""

from __future__ import annotations


class ToricError(Exception):
    """Base class for all toolkit errors."""


class NoFiniteSupportError(ToricError, ValueError):
    """A sampled function (or a conjugate mix) is +inf at every node."""

    def __init__(self, message: str = "no finite support") -> None:
        super().__init__(message)


class DomainError(ToricError, ValueError):
    """A family was evaluated outside its parameter domain."""


class StencilError(ToricError, ValueError):
    """A finite-difference stencil left the smooth region of a weight."""


class DivergenceError(ToricError, ArithmeticError):
    """An integral that should be finite was detected to diverge."""


class ConfigError(ToricError, ValueError):
    """A JSON configuration could not be interpreted."""
