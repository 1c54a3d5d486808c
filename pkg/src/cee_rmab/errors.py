"""Exception hierarchy. The CLI maps each class to a named, nonzero exit."""


class CeeError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ChainValidationError(CeeError, ValueError):
    """A Markov chain violates a structural property (names the property)."""

    exit_code = 3

    def __init__(self, prop, message):
        self.property = prop
        super().__init__(f"{prop}: {message}")


class SolverError(CeeError, ArithmeticError):
    exit_code = 4


class ScheduleError(CeeError, ValueError):
    exit_code = 5


class InfeasibleScheduleError(ScheduleError):
    """A constant schedule sits below the bound needed by the analysis."""

    def __init__(self, required, actual):
        self.required = required
        self.actual = actual
        super().__init__(
            f"constant step length {actual} is below the required bound "
            f"{required:.4f} (need B >= {int(-(-required // 1))})"
        )


class PolicyConfigError(CeeError, ValueError):
    exit_code = 6


class HandshakeError(CeeError, RuntimeError):
    """Decision/report protocol misuse between a policy and its driver."""

    exit_code = 7


class BoundError(CeeError, ValueError):
    exit_code = 8


class ScenarioError(CeeError, ValueError):
    exit_code = 9


class ExportError(CeeError, OSError):
    exit_code = 10


class ValidationFailure(CeeError):
    """At least one concentration check exceeded its bound plus slack."""

    exit_code = 11
