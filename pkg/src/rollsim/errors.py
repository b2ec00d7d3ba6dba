"""Exception hierarchy shared by all rollsim modules.

Validation-type errors map to CLI exit code 1, solver/training errors to 2.
"""


class RollsimError(Exception):
    """Base class for every error raised by rollsim."""


class ValidationError(RollsimError, ValueError):
    """Invalid input value, named by field where possible."""


class ConfigError(ValidationError):
    """Inconsistent or malformed configuration."""


class DomainError(ValidationError):
    """Argument outside the mathematical domain of an operation."""


class ParseError(ValidationError):
    """Malformed dataset or model file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DependencyError(ValidationError):
    """A command needs outputs of a previous command that are missing."""


class NoAnalyticalNeutral(DomainError):
    """Friction too low for the draft: the analytical neutral angle is undefined."""


class SolverError(RollsimError, RuntimeError):
    """Numerical failure inside a solver."""

    def __init__(self, message, step=None):
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
        self.step = step


class NoNeutralPoint(SolverError):
    """Entry and exit pressure branches never intersect."""


class BoundaryConditionError(SolverError):
    """The constrained beam system is singular."""


class MeshError(SolverError):
    """Internal mesh construction inconsistency."""


class TrainingError(RollsimError, RuntimeError):
    """Levenberg-Marquardt training failed."""

    def __init__(self, message, epoch=None):
        if epoch is not None:
            message = f"{message} (epoch {epoch})"
        super().__init__(message)
        self.epoch = epoch
