"""Exception and warning types raised by the package."""


class LGKSError(Exception):
    """Base class for all errors raised here."""


class NonHermitianInput(LGKSError, ValueError):
    pass


class DecompositionFailure(LGKSError):
    pass


class DimensionMismatch(LGKSError, ValueError):
    pass


class NonlinearAction(LGKSError, ValueError):
    pass


class NonpositiveFrequency(LGKSError, ValueError):
    pass


class ZeroFrequencyChannel(LGKSError, ValueError):
    pass


class NegativeRate(LGKSError, ValueError):
    pass


class UnstableStep(LGKSError):
    pass


class NonUniqueSteadyState(LGKSError):
    pass


class NoConvergence(LGKSError):
    pass


class UnresolvedDegeneracy(LGKSError):
    pass


class EigenvalueShiftPresent(LGKSError):
    pass


class NotSteady(LGKSError, ValueError):
    pass


class GridTooCoarse(LGKSError):
    pass


class NonDecayingResponse(LGKSError):
    pass


class UnknownBath(LGKSError, KeyError):
    pass


class SingularReference(LGKSError):
    pass


class ZeroTemperatureBath(LGKSError, ValueError):
    pass


class RankDeficientState(LGKSError):
    pass


class NotStationaryReference(LGKSError, ValueError):
    pass


class TruncationTooSmall(LGKSError):
    pass


class RegimeWarning(UserWarning):
    """Perturbation strength sits outside the regime a method is meant for."""
