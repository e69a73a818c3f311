"""Exception hierarchy shared by all modules."""


class HypThickError(Exception):
    """Base class for library errors."""


class ValidationError(HypThickError, ValueError):
    """Invalid input or configuration."""


class NumericalError(HypThickError, ArithmeticError):
    """Base class for numerical failures (CLI exit code 3)."""


class NonConvergent(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class OutOfRegion(ValidationError):
    pass


class EmptyRegion(ValidationError):
    pass


class SingularWindow(NumericalError):
    pass


class Overflow(NumericalError, OverflowError):
    pass


class DegenerateField(NumericalError):
    pass


class InfeasibleCurvature(ValidationError):
    pass


class NoFeasiblePoint(NumericalError):
    pass


class NonFinite(ValidationError):
    pass
