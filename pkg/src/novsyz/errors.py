"""Exception and warning types shared across the package."""


class NovsyzError(Exception):
    """Base class for all errors raised by novsyz."""


class UnresolvedComparison(NovsyzError):
    """Witness enclosures could not separate two symbolically distinct scalars."""


class SymbolTableMismatch(NovsyzError):
    pass


class UnknownSymbol(NovsyzError):
    pass


class InsufficientPrecision(NovsyzError):
    pass


class NovikovDivisionByZero(NovsyzError, ZeroDivisionError):
    pass


class TorsionPresent(NovsyzError):
    pass


class NullClass(NovsyzError):
    pass


class RayTooShort(NovsyzError):
    pass


class NotContained(NovsyzError):
    pass


class NotAdmissible(NovsyzError):
    pass


class NotParallelCut(NovsyzError):
    pass


class DegenerateProfile(NovsyzError):
    pass


class SchemaError(NovsyzError):
    """Malformed input document; ``pointer`` is a JSON pointer to the offending node."""

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class IOFailure(NovsyzError, OSError):
    """An input could not be read or an output could not be written."""


class NovsyzWarning(UserWarning):
    pass


class NonIntegralShift(NovsyzWarning):
    pass


class GapViolation(NovsyzWarning):
    pass


class InjectivityHypothesisUnchecked(NovsyzWarning):
    pass
