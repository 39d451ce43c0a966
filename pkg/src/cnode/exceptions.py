"""Exception hierarchy shared by all modules."""


class InvalidInputError(ValueError):
    """Malformed or out-of-domain input."""


class NoSignalPathError(InvalidInputError):
    """Every eigenvalue of the channel Gram matrix is zero."""


class InfeasibleSnrError(InvalidInputError):
    """snr below the smallest feasible value 1/lambda_0."""


class ConvergenceError(RuntimeError):
    """A quadrature or root-finding loop did not reach its tolerance."""


class TruncationError(InvalidInputError):
    """A time grid is too short for the symbol's effective support."""


class NumericError(RuntimeError):
    """Failure inside a dense linear-algebra routine."""
