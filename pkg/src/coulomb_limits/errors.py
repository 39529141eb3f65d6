"""Exception hierarchy shared by every module of the package."""


class CoulombLimitsError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(CoulombLimitsError, ValueError):
    """A numeric argument is outside its admissible range."""


class SpecError(InvalidParameterError):
    """A potential specification document is malformed."""


class UnknownBuiltinError(CoulombLimitsError, LookupError):
    """Requested builtin family does not exist."""


class ContractViolation(CoulombLimitsError, ValueError):
    """A precondition on the input data (not just a number) does not hold."""


class NumericalError(CoulombLimitsError, RuntimeError):
    """A numerical procedure failed.

    ``module`` and ``location`` identify where; the CLI prints both.
    """

    def __init__(self, message, *, module=None, location=None):
        super().__init__(message)
        self.module = module
        self.location = location

    def __str__(self):
        msg = super().__str__()
        extra = []
        if self.module is not None:
            extra.append(f"module={self.module}")
        if self.location is not None:
            extra.append(f"location={self.location}")
        return f"{msg} ({', '.join(extra)})" if extra else msg


class StiffnessError(NumericalError):
    """Adaptive step size underflowed."""


class SeriesConvergenceError(NumericalError):
    """Frobenius series did not converge at the requested hand-off radius."""


class DegenerateCouplingError(NumericalError):
    """Linear system for the coupling coefficients is singular."""


class NearEigenvalueError(NumericalError):
    """Wronskian of the decaying solutions vanished."""
