"""Exception hierarchy shared by all solvfel modules."""


class SolvfelError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SolvfelError, ValueError):
    """An input lies outside the domain of the formula it feeds."""


class PolarizationRangeError(DomainError):
    """Polarization fraction would exceed 1."""


class DegenerateCouplingError(DomainError):
    """Zero permanent polarization: the field has nothing to drive."""


class ConfigError(SolvfelError):
    """Invalid or incomplete configuration file."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
            if line is not None:
                where += f"{line}:"
            where += " "
        super().__init__(where + message)


class IntegrationDiverged(SolvfelError, RuntimeError):
    """Non-finite state encountered mid-run.

    ``last_record`` holds the record of the last finite state.
    """

    def __init__(self, message, last_record=None):
        super().__init__(message)
        self.last_record = last_record


class InsufficientGrowthError(SolvfelError, ValueError):
    """No window of exponential growth could be located in a trace."""


class NotSaturatedError(SolvfelError, ValueError):
    """Trace never reaches a qualifying first maximum."""
