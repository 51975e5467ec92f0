"""Exception types shared across the package."""


class SutherlandError(Exception):
    """Base class for all package errors."""


class PoleError(SutherlandError, ValueError):
    """A Gamma function argument sits on a pole."""


class KernelZero(SutherlandError):
    """The kernel vanishes because a denominator Gamma hits a pole."""


class DenominatorZero(SutherlandError, ZeroDivisionError):
    """A rational Gelfand-Zetlin coefficient has a vanishing denominator."""


class InvalidRange(SutherlandError, ValueError):
    pass


class GridTooCoarse(SutherlandError):
    """Quadrature did not reach the requested tolerance."""


class CoincidentCoordinates(SutherlandError, ValueError):
    pass


class Divergence(SutherlandError):
    """A series was asked to sum outside its usable domain."""


class SingularParameter(SutherlandError, ValueError):
    pass


class StencilTooWide(SutherlandError, ValueError):
    pass
