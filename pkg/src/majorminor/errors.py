"""Exception hierarchy shared by all modules."""


class MajorMinorError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MajorMinorError, ValueError):
    """An input violates a type invariant or an operation precondition."""


class NotDifferentiable(MajorMinorError):
    """The target has no trading rate (inventory with jumps)."""


class NotPeriodic(DomainError):
    """The target does not admit a periodic-residual decomposition."""


class GridMismatch(DomainError):
    """Two tabulated functions live on incompatible grids."""


class SingularSystem(MajorMinorError):
    """A direct linear solve detected a (numerically) singular matrix."""


class SingularMatrix(SingularSystem):
    """``I - exp(A T/n)`` is not invertible."""


class SingularKKT(SingularSystem):
    """The best-response KKT system is singular."""


class NonConvergence(MajorMinorError):
    """The periodic fixed-point iteration did not reach its tolerance."""

    def __init__(self, message, last_update=None):
        super().__init__(message)
        self.last_update = last_update


class DegeneratePhase(MajorMinorError):
    """Phase requested for a periodic component that is identically zero."""


class ConfigError(MajorMinorError):
    """Base class for configuration problems."""


class ParseError(ConfigError):
    """The configuration file is not valid INI text."""


class SchemaError(ConfigError):
    """Unknown, missing, or mistyped configuration keys."""
