"""Exception types shared across the package."""


class GridError(ValueError):
    """Invalid grid construction (odd size, too few points, bad period)."""


class ShearError(ValueError):
    """Shear specification inconsistent with the requested grid."""


class PositivityError(RuntimeError):
    """The dominant eigenvector could not be normalized to be strictly
    positive.  Signals an under-resolved discretization."""


class ComplexEigenvalueError(RuntimeError):
    """The eigenvalue of maximal real part has a nonnegligible imaginary
    part, so no principal (positive-eigenvector) pair exists discretely."""


class ConvergenceError(RuntimeError):
    """Minimization failed to converge; carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InsufficientDataError(ValueError):
    """Too few usable data points for the requested fit."""


class RecordParseError(ValueError):
    """Malformed row in a records file; carries the offending line number."""

    def __init__(self, message, line_number):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class StabilityError(RuntimeError):
    """Time step violates the advection or reaction stability bound."""


class BoundaryContaminationError(RuntimeError):
    """The front reached the truncated domain boundary; carries the
    partial trace recorded up to that point."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
