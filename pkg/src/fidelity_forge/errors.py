"""Exception types raised across the package."""


class FidelityForgeError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(FidelityForgeError, ValueError):
    pass


class NotHermitian(FidelityForgeError, ValueError):
    pass


class NoConvergence(FidelityForgeError, ArithmeticError):
    pass


class NotUnitary(FidelityForgeError, ValueError):
    pass


class TooManyQubits(FidelityForgeError, ValueError):
    pass


class OutOfRange(FidelityForgeError, ValueError):
    pass


class SingularOverlap(FidelityForgeError, ArithmeticError):
    pass


class InvalidQubitIndex(FidelityForgeError, ValueError):
    pass


class WrongParameterCount(FidelityForgeError, ValueError):
    pass


class DegenerateDistribution(FidelityForgeError, ValueError):
    """The setting distribution carries (almost) no probability mass."""


class InvalidProbabilities(FidelityForgeError, ValueError):
    """Outcome probabilities leaked too far below zero to be clamped."""


class ShotsNotDivisible(FidelityForgeError, ValueError):
    pass


class IllConditionedKernel(FidelityForgeError, ArithmeticError):
    pass


class FixtureError(FidelityForgeError, ValueError):
    pass


class ConfigError(FidelityForgeError, ValueError):
    pass
