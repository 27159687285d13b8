"""Exception types raised across the package."""


class WSLightError(Exception):
    """Base class for all package errors."""


class AllZeroWindow(WSLightError, ValueError):
    pass


class NonFinite(WSLightError, ValueError):
    pass


class NotHermitian(WSLightError, ValueError):
    pass


class AsymmetricBeta(WSLightError, ValueError):
    pass


class WindowOutOfRange(WSLightError, IndexError):
    pass


class ZeroState(WSLightError, ValueError):
    pass


class OmegaOutOfBand(WSLightError, ValueError):
    pass


class NonPositive(WSLightError, ValueError):
    pass


class AlphaOutOfRange(WSLightError, ValueError):
    pass


class TruncationFailure(WSLightError, RuntimeError):
    pass


class BothZero(WSLightError, ZeroDivisionError):
    pass


class ExcessiveShift(WSLightError, ValueError):
    pass


class SingularDeterminant(WSLightError, ArithmeticError):
    pass


class CWNotSupported(WSLightError, ValueError):
    pass


class LeakageExceeded(WSLightError, RuntimeError):
    pass


class ConfigError(WSLightError, ValueError):
    pass
