"""Exception hierarchy shared by every module of the package."""


class CeqtsError(Exception):
    """Base class for all errors raised by ceqts."""


class BadModulus(CeqtsError, ValueError):
    """The field size is not prime, too large, or below the construction's floor."""


class NotInvertible(CeqtsError, ZeroDivisionError):
    pass


class ShapeError(CeqtsError, ValueError):
    pass


class SingularMatrix(CeqtsError, ValueError):
    pass


class BadEvaluationPoints(CeqtsError, ValueError):
    """Evaluation points are repeated, zero where zero is forbidden, or too few."""


class ZeroState(CeqtsError, ValueError):
    pass


class CapacityExceeded(CeqtsError, MemoryError):
    """A computation would exceed the configured term or dense-matrix budget."""


class NoCloningViolation(CeqtsError, ValueError):
    """More than 2k-1 parties requested for a threshold-k scheme."""


class AccessStructureViolation(CeqtsError, ValueError):
    """The accessed party set is not authorized, or too many shares dropped."""


class UnsupportedD(CeqtsError, ValueError):
    """The scheme has no recovery procedure for this number of accessed parties."""


class ScheduleError(CeqtsError, RuntimeError):
    """A recovery schedule is malformed or touches qudits the combiner never received."""


class BadParameters(CeqtsError, ValueError):
    """Scheme parameters are inconsistent (e.g. k < 2, n < k, d outside its range)."""
