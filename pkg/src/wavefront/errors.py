"""Exception types raised across the package."""


class WavefrontError(Exception):
    """Base class. ``exit_code`` is what the CLI returns for it."""

    exit_code = 3


class ConfigError(WavefrontError):
    exit_code = 2


# flux construction and validation
class NonConvex(ConfigError):
    pass


class MinimumNotZero(ConfigError):
    pass


class NotConvexAfterSampling(ConfigError):
    pass


class OutOfDomain(WavefrontError):
    pass


class NegativeLevel(WavefrontError):
    pass


class AboveRange(WavefrontError):
    pass


class OutOfRange(WavefrontError):
    pass


class ClosureOverflow(WavefrontError):
    pass


class DegenerateGrid(WavefrontError):
    pass


# riemann / tracking
class OffGrid(ConfigError):
    pass


class LevelMismatch(WavefrontError):
    pass


class EmptyData(ConfigError):
    pass


class InconsistentEvent(WavefrontError):
    pass


class EventBudgetExceeded(WavefrontError):
    pass


class InvariantViolation(WavefrontError):
    pass


class BeyondReachedTime(WavefrontError):
    pass


# diagnostics
class NotUniformlyConvex(WavefrontError):
    pass


class PlateauPresent(WavefrontError):
    pass


class ConeEmpty(WavefrontError):
    pass


# scenarios
class GeometryViolated(WavefrontError):
    pass


class ConvexityFloorViolated(ConfigError):
    pass


# reference scheme
class CFLViolation(ConfigError):
    pass
