"""Exception hierarchy shared by the estimators and the command line."""


class CovarianceError(ValueError):
    """Base class for domain violations raised by gramcov."""


class InsufficientObservations(CovarianceError):
    """Raised when a denominator containing ``n - 1`` would vanish."""


class ShapeMismatch(CovarianceError):
    """Raised when operand dimensions disagree."""


class NonFiniteInput(CovarianceError):
    """Raised at ingestion when data contains NaN or infinity."""
