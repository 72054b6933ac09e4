"""Exception hierarchy shared by the solver modules."""


class KsplapError(Exception):
    """Base class for all package errors."""


class ConfigurationError(KsplapError, ValueError):
    """Invalid user input: bad bounds, resolution, coefficients or config keys."""


class GeometryError(KsplapError, ValueError):
    """Non-positive lengths, empty cylinders, malformed edge data."""


class ParameterError(KsplapError, ValueError):
    """Parameters outside the admissible range of a diagnostic formula."""


class StabilityError(KsplapError, ArithmeticError):
    """An explicit step left the admissible range.

    Carries the offending ``field`` name, ``value`` and ``cell`` index so the
    driver can decide whether to retry with a smaller step.
    """

    def __init__(self, field, value, cell, dt):
        self.field = field
        self.value = value
        self.cell = cell
        self.dt = dt
        super().__init__(
            f"{field}[{cell}] = {value!r} out of range after step dt={dt!r}"
        )


class SolverAbort(KsplapError, RuntimeError):
    """Too many consecutive rejected steps; ``state`` holds the last accepted state."""

    def __init__(self, message, state=None, last_error=None):
        super().__init__(message)
        self.state = state
        self.last_error = last_error


class UsageError(KsplapError, ValueError):
    """A diagnostic applied to data it was not designed for."""
