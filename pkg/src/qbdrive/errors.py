"""Exception types raised by the numerical routines."""


class QBDriveError(Exception):
    """Base class for all package errors."""


class NonHermitianError(QBDriveError, ValueError):
    pass


class DimensionMismatch(QBDriveError, ValueError):
    pass


class NearDegeneracy(QBDriveError, ArithmeticError):
    """Two eigenvalues closer than the gap tolerance."""


class AmbiguousTracking(QBDriveError, ArithmeticError):
    """Best eigenvector overlap between neighbouring grid points too small."""


class ZeroField(QBDriveError, ValueError):
    pass


class NoCompletion(QBDriveError, ArithmeticError):
    """The completion equation has no exact solution.

    The least-squares result is kept on ``completion`` so callers can
    inspect the residual.
    """

    def __init__(self, message, completion=None):
        super().__init__(message)
        self.completion = completion


class NoSolution(QBDriveError, ArithmeticError):
    """Algebraic system of the trajectory solver is inconsistent."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class InitialConditionViolated(QBDriveError, ValueError):
    pass


class ZeroVariance(QBDriveError, ArithmeticError):
    pass


class PreconditionError(QBDriveError, ValueError):
    pass


class NoSuchEigenvalue(QBDriveError, ValueError):
    pass


class DegenerateEigenvalue(QBDriveError, ValueError):
    pass


class DegenerateSegment(QBDriveError, ArithmeticError):
    """Energy variance vanishes on part of the trajectory."""


class ConfigError(QBDriveError, ValueError):
    pass
