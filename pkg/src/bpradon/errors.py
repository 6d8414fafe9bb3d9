"""Exception types raised across the package."""


class BPRadonError(Exception):
    """Base class for all package errors."""


class TooFewPoints(BPRadonError, ValueError):
    pass


class InvalidJitter(BPRadonError, ValueError):
    pass


class WrongCount(BPRadonError, ValueError):
    pass


class Singular(BPRadonError, ArithmeticError):
    pass


class OrderTooLarge(BPRadonError, ValueError):
    pass


class QuadratureUnderResolved(BPRadonError, ArithmeticError):
    """Oscillation of the Hankel integrand exceeds what the rule can resolve."""


class ToleranceViolation(BPRadonError, ArithmeticError):
    pass


class GridNotValidated(BPRadonError, ValueError):
    """Raised when a reconstruction is attempted on an unvalidated or failing grid."""


class NoConvergence(BPRadonError, ArithmeticError):
    pass


class NonUniformGrid(BPRadonError, ValueError):
    pass
