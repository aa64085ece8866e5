"""Exception hierarchy. Every error is a ``ValueError`` so callers can catch broadly."""


class TailRankError(ValueError):
    pass


class EmptySampleError(TailRankError):
    pass


class DegenerateThresholdError(TailRankError):
    pass


class OutOfSupportError(TailRankError):
    pass


class MomentDivergenceError(TailRankError):
    pass


class SingularParameterError(TailRankError):
    pass


class InsufficientDataError(TailRankError):
    pass


class InvalidThresholdError(TailRankError):
    pass


class InvalidViewError(TailRankError):
    pass


class InvalidBetaError(TailRankError):
    pass


class InvalidGammaError(TailRankError):
    pass


class EmptyRangeError(TailRankError):
    pass


class MissingPointError(TailRankError):
    pass


class SchemaError(TailRankError):
    pass


class DataError(TailRankError):
    pass


class EmptySubsetError(TailRankError):
    pass


class ConfigError(TailRankError):
    pass
