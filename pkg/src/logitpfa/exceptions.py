"""Exception hierarchy shared across the pipeline."""


class LogitPFAError(Exception):
    """Base class for all errors raised by logitpfa."""


class DegenerateInput(LogitPFAError, ValueError):
    """Constant predictor, single-class outcome or too few observations."""


class SeparationDetected(LogitPFAError, ArithmeticError):
    """The logistic MLE does not exist (complete or quasi-complete separation)."""


class NoConvergence(LogitPFAError, ArithmeticError):
    """An iterative solver hit its iteration cap."""


class SingularInformation(LogitPFAError, ArithmeticError):
    """The averaged Fisher information is numerically singular."""


class ShapeMismatch(LogitPFAError, ValueError):
    pass


class ZeroVariance(LogitPFAError, ArithmeticError):
    pass


class NotSymmetric(LogitPFAError, ValueError):
    pass


class RankDeficientDesign(LogitPFAError, ArithmeticError):
    pass


class InvalidThreshold(LogitPFAError, ValueError):
    pass


class EmptyGrid(LogitPFAError, ValueError):
    pass


class InvalidConfig(LogitPFAError, ValueError):
    pass


class ParseError(LogitPFAError, ValueError):
    """Input file could not be turned into a complete numeric matrix."""


class TooFewColumns(LogitPFAError, ValueError):
    """Fewer than two predictor columns survived marginal fitting."""
