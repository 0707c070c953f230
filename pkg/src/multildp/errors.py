"""Exception hierarchy shared by every module.

Validation problems derive from :class:`ValidationError` (CLI exit code 2);
numerical failures derive from :class:`NumericalError` (CLI exit code 3).
"""


class LDPError(Exception):
    pass


class ValidationError(LDPError, ValueError):
    pass


class NumericalError(LDPError, ArithmeticError):
    pass


class NonPositiveEntry(ValidationError):
    pass


class AllOnes(ValidationError):
    pass


class NotPairwiseCoprime(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class BoxTooLarge(ValidationError):
    pass


class CountOverflow(NumericalError):
    pass


class BiasOutOfRange(ValidationError):
    pass


class NonFiniteInput(ValidationError):
    pass


class InvalidProfile(ValidationError):
    pass


class UnsupportedDimension(ValidationError):
    pass


class OutOfSpectrumDomain(ValidationError):
    pass


class MissingSite(ValidationError):
    pass


class SupportTooLarge(ValidationError):
    pass


class NonConvergence(NumericalError):
    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class InsufficientHits(NumericalError):
    def __init__(self, message, hits):
        super().__init__(message)
        self.hits = hits
