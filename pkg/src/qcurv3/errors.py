"""Exception types shared across the package."""


class QCurvError(Exception):
    """Base class for all package-specific failures."""


class NumericalError(QCurvError):
    """A computation produced a non-finite or degenerate value.

    Carries the offending value (e.g. the largest exponent seen) in
    ``detail`` so callers can report it.
    """

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail


class ConvergenceError(QCurvError):
    """The optimizer ran out of iterations before reaching tolerance."""

    def __init__(self, message, residual, coeffs=None, iterations=0):
        super().__init__(message)
        self.residual = residual
        self.coeffs = coeffs
        self.iterations = iterations


class DivergenceError(QCurvError):
    """A radial integrand fails to decay, so the integral is untrusted."""


class SingularInputError(QCurvError):
    """Evaluation requested exactly on a kernel singularity."""


class CriteriaDisagreementError(QCurvError):
    """The sphericality criteria voted inconsistently (numerical trouble)."""

    def __init__(self, message, votes=None):
        super().__init__(message)
        self.votes = votes
