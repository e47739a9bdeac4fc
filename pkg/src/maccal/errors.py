"""Exception taxonomy shared across the package."""


class MacCalError(Exception):
    """Base class for all package errors."""


class ShapeError(MacCalError, ValueError):
    """Operand dimensions are inconsistent."""


class DomainError(MacCalError, ValueError):
    """A parameter is outside its valid range."""


class StateError(MacCalError, RuntimeError):
    """An operation was called on an object in the wrong state."""


class DivergenceError(MacCalError, RuntimeError):
    """Training produced a non-finite loss."""
