"""Exception hierarchy shared by all kvwave modules."""


class KVWaveError(Exception):
    """Base class for every error raised by kvwave."""


class ConfigError(KVWaveError):
    """A system configuration violates the geometry of its case."""


class IntervalOrderViolation(ConfigError):
    pass


class NegativeDamping(ConfigError):
    pass


class CaseMismatch(ConfigError):
    pass


class ZeroCoupling(ConfigError):
    pass


class OutOfDomain(ConfigError):
    pass


class SscInapplicable(KVWaveError):
    pass


class ResolutionTooCoarse(KVWaveError):
    pass


class DimensionMismatch(KVWaveError):
    pass


class SingularSystem(KVWaveError):
    pass


class NonFiniteState(KVWaveError):
    pass


class BadParameters(KVWaveError):
    pass


class WindowTooShort(KVWaveError):
    pass


class NonPositiveEnergy(KVWaveError):
    pass


class TooLargeForDense(KVWaveError):
    pass


class NumericallySingular(KVWaveError):
    pass


class EmptyGrid(KVWaveError):
    pass


class InsufficientSpan(KVWaveError):
    pass


class ParseError(KVWaveError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ValidationError(KVWaveError):
    pass
