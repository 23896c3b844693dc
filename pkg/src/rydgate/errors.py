"""Exception hierarchy shared across the package."""


class RydgateError(Exception):
    """Base class for all package-specific errors."""


class DomainError(RydgateError, ValueError):
    """An input violates a physical or mathematical constraint."""


class IntegrationError(RydgateError):
    """Adaptive propagation failed (step-size underflow)."""

    def __init__(self, message, t_reached=None):
        super().__init__(message)
        self.t_reached = t_reached


class CalibrationError(RydgateError):
    """Root finding for a pulse parameter failed."""

    def __init__(self, message, bracket=None, values=None):
        super().__init__(message)
        self.bracket = bracket
        self.values = values


class ConvergenceError(RydgateError):
    """A truncated-basis result did not pass its convergence check."""


class ScenarioError(RydgateError):
    """A scenario file failed validation; carries every problem found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
