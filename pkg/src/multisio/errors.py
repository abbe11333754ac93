"""Exception types raised by the workbench."""


class MultisioError(ValueError):
    """Base class for every precondition failure raised by the package."""


class OddN(MultisioError):
    pass


class NonPositiveExtent(MultisioError):
    pass


class BumpTooWide(MultisioError):
    pass


class BandExceedsNyquist(MultisioError):
    pass


class UnsupportedDimension(MultisioError):
    pass


class SingularityTooStrong(MultisioError):
    pass


class OriginEvaluation(MultisioError):
    pass


class EpsilonBelowResolution(MultisioError):
    pass


class ScaleOutOfRange(MultisioError):
    pass


class RadiusOutOfRange(MultisioError):
    pass


class GridMismatch(MultisioError):
    pass


class OrderOutOfRange(MultisioError):
    pass


class ResolutionTooCoarse(MultisioError):
    pass


class DegenerateFit(MultisioError):
    pass


class MissingCoefficients(MultisioError):
    pass


class ConfigError(MultisioError):
    """Invalid or inconsistent experiment configuration."""
