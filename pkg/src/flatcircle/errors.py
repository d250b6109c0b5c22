"""Exception hierarchy shared by all modules."""


class FlatCircleError(Exception):
    """Base class for every error raised by this package."""


class PointInsideInterval(FlatCircleError):
    pass


class OverlappingIntervals(FlatCircleError):
    pass


class InvalidParams(FlatCircleError):
    pass


class FlatValue(FlatCircleError):
    """Inverse requested at the critical value without choosing a side."""


class InvalidEigenvalues(FlatCircleError):
    pass


class PrecisionExhausted(FlatCircleError):
    """A sign or ordering could not be certified at the precision cap."""


class TuningFailed(FlatCircleError):
    pass


class OrbitHitsFlat(FlatCircleError):
    """A forward image of the flat interval certifiably re-entered it."""


class StructureViolation(FlatCircleError):
    pass


class InsufficientData(FlatCircleError):
    pass


class InsufficientLevels(FlatCircleError):
    pass


class DegenerateQuadruple(FlatCircleError):
    pass


class FlatIntervalHit(FlatCircleError):
    pass


class NotDiffeomorphic(FlatCircleError):
    pass


class MissingStage(FlatCircleError):
    pass


class ConfigError(FlatCircleError):
    pass
