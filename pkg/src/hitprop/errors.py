"""Exception types raised by the numerical routines."""


class HitPropError(Exception):
    """Base class for all errors raised by hitprop."""


class DimensionMismatchError(HitPropError, ValueError):
    pass


class SingularConfigurationError(HitPropError, ValueError):
    """A segment of the polygonal path has zero length where the hit function diverges."""


class DegenerateApproximantError(HitPropError, ZeroDivisionError):
    """Pade or Shanks denominator vanishes; the approximant is undefined."""


class QuadratureError(HitPropError, RuntimeError):
    """An integral did not reach its requested tolerance."""


class CutoffSensitivityError(QuadratureError):
    """Doubling a radial cutoff moved the result by more than the tolerance."""


class RootFindingError(HitPropError, RuntimeError):
    pass
