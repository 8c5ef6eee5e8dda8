"""Exception hierarchy shared by all modules."""


class IfsError(ValueError):
    """Base class for every error raised by ifs_lab."""


class AlphabetError(IfsError):
    pass


class EmptyDomainError(IfsError):
    pass


class FullCircleError(IfsError):
    pass


class MonotonicityError(IfsError):
    """A lift failed the strict monotonicity or degree-one check."""


class OrientationError(IfsError):
    pass


class DegenerateError(IfsError):
    pass


class MeasureError(IfsError):
    pass


class ProbabilityError(IfsError):
    pass


class PrecisionError(IfsError):
    pass


class InconsistencyError(IfsError):
    """Internal cross-check failed; usually the grid is too coarse."""


class NoFixedPointsError(IfsError):
    pass


class NotFixedError(IfsError):
    pass


class SmoothnessError(IfsError):
    pass


class PerturbationTooLargeError(IfsError):
    pass


class AtomError(IfsError):
    pass


class ConstructionError(IfsError):
    pass


class ConfigError(IfsError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
