"""Exception hierarchy shared by every module.

Two families map onto CLI exit codes: ``ValidationError`` (bad or
inconsistent input, exit 1) and ``NumericalError`` (a computed defect
exceeded its tolerance, exit 2).
"""


class KolmoError(Exception):
    """Base class for all package errors."""


class ValidationError(KolmoError):
    pass


class NumericalError(KolmoError):
    pass


# numlin
class NotHermitian(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


# kernel
class NotPositiveDefinite(ValidationError):
    pass


class LabelMismatch(ValidationError):
    pass


class PointMismatch(LabelMismatch):
    pass


class DimensionMismatch(ValidationError):
    pass


class Unbounded(ValidationError):
    pass


class NotDominated(ValidationError):
    pass


# structured representations
class NotGroupKernel(ValidationError):
    pass


class IncompatibleKernel(ValidationError):
    pass


class NonPeriodic(ValidationError):
    pass


class NotInvariant(ValidationError):
    pass


# frames
class NotNTF(ValidationError):
    pass


class NotNTFVector(ValidationError):
    pass


# filters / dilation
class NotQMF(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class NotHarmonic(ValidationError):
    pass


class NotNonnegative(ValidationError):
    pass


class InvalidCycle(ValidationError):
    pass


class NoTrivialCycle(ValidationError):
    pass


class ConvergenceError(NumericalError):
    pass
