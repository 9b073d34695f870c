"""Exception hierarchy shared by every evsr module."""


class EvsrError(Exception):
    """Base class for all evsr errors."""


class DataError(EvsrError, ValueError):
    """Input data violates a documented contract."""


class OutOfBounds(DataError):
    pass


class BadPolarity(DataError):
    pass


class TimeExtentTooSmall(DataError):
    pass


class ZeroExtent(DataError):
    pass


class BadFactor(DataError):
    pass


class BadPosition(DataError):
    pass


class BadBinCount(DataError):
    pass


class GeometryMismatch(DataError):
    pass


class SourceMismatch(DataError):
    pass


class FieldMismatch(DataError):
    pass


class ScaleMismatch(DataError):
    pass


class GridTooSmall(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class EmptyMask(DataError):
    pass


class ParseError(DataError):
    def __init__(self, reason, line=None):
        self.line = line
        self.reason = reason
        msg = reason if line is None else f"line {line}: {reason}"
        super().__init__(msg)


class MagicMismatch(DataError):
    pass


class TruncatedFile(DataError):
    pass


class NumericalError(EvsrError, ArithmeticError):
    """Training or inference produced non-finite values."""


class NonFiniteActivation(NumericalError):
    pass


class NonFiniteLoss(NumericalError):
    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


class NoTrace(EvsrError, RuntimeError):
    pass


class PipelineError(EvsrError, RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
