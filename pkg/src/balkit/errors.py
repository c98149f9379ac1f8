"""Exception types shared across the toolkit."""


class BalkitError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(BalkitError, ValueError):
    """Matrix dimensions are inconsistent with each other or with the request."""


class SingularMatrixError(BalkitError):
    """A matrix or pencil that must be inverted is (numerically) singular."""


class StabilityError(BalkitError):
    """A stability property required by an operation does not hold or cannot be checked."""


class ConvergenceError(BalkitError):
    """An iterative solver exhausted its budget without reaching the target."""


class SigmaTieError(BalkitError):
    """The Hankel spectrum has no gap at the requested order."""


class RankError(BalkitError):
    """Requested order exceeds the numerical rank of the data."""


class FormatError(BalkitError, ValueError):
    """A file does not conform to the documented schema."""
