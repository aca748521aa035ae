"""Exception and warning types raised across the package."""


class MLCalcError(Exception):
    """Base class for all package errors."""


class NonConvergent(MLCalcError, ArithmeticError):
    """A series could not be summed to tolerance in the validated range."""


class QuadratureFailure(MLCalcError, ArithmeticError):
    """A quadrature tail estimate exceeded its tolerance."""


class DegreeMismatch(MLCalcError, ValueError):
    pass


class DimMismatch(MLCalcError, ValueError):
    pass


class BetaMismatch(MLCalcError, ValueError):
    pass


class DegreeOverflow(MLCalcError, ValueError):
    """Requested moment degree exceeds the built moment-kernel budget."""


class TruncationOverflow(MLCalcError, ValueError):
    """Operator output degree exceeds the truncation capacity."""


class OutsideDomain(MLCalcError, ValueError):
    """Argument lies outside the domain where the exponential is normalizable."""


class BasisMismatch(MLCalcError, ValueError):
    pass


class BetaOutOfRange(MLCalcError, ValueError):
    pass


class RangeWarning(UserWarning):
    """Evaluation outside the declared validated range."""
