"""Exception and warning classes raised across the package."""


class RabiSimError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(RabiSimError, ValueError):
    pass


class LayoutError(RabiSimError, KeyError):
    """Unknown factor label or incompatible layouts."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class DomainError(RabiSimError, ValueError):
    """Quantum numbers or parameters outside their allowed range."""


class TruncationError(RabiSimError):
    """The Fock cutoff is too small for the requested calculation."""


class SingularDetuningError(RabiSimError, ZeroDivisionError):
    pass


class AdiabaticityError(RabiSimError, ValueError):
    """A design target would violate the large-detuning regime."""


class StiffnessError(RabiSimError):
    """Integrator step size underflow."""


class DegenerateSteadyStateError(RabiSimError):
    """The Liouvillian kernel has dimension larger than one."""


class UndefinedCorrelationError(RabiSimError, ZeroDivisionError):
    pass


class ConfigError(RabiSimError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TruncationWarning(UserWarning):
    pass


class UnbalancedCouplingWarning(UserWarning):
    pass


class FitQualityWarning(UserWarning):
    pass


class InvalidStateError(RabiSimError, ValueError):
    """A density matrix violates trace, Hermiticity or positivity bounds."""
