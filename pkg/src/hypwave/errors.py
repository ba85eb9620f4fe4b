"""Exception hierarchy shared by every hypwave module."""


class HypwaveError(Exception):
    """Base class for all library errors."""


class SpacelikeSeparation(HypwaveError, ValueError):
    """Two points are outside each other's characteristic cone."""


class OutOfSector(HypwaveError, ValueError):
    """A point is not in the right sector ``x > |y|``."""


class DegenerateConfig(HypwaveError, ValueError):
    """A point sits on the light cone of the origin, so its distance is zero."""


class ConfigError(HypwaveError, ValueError):
    """The dependence configuration cannot be built from the inputs."""


class RhoTooLarge(HypwaveError, ValueError):
    """The auxiliary semi-diameter does not give two intersections with the data curve."""


class NearCharacteristic(HypwaveError, ValueError):
    """A finite-difference stencil would straddle a singular characteristic."""


class NoConvergence(HypwaveError, RuntimeError):
    """Adaptive quadrature ran out of refinement budget."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ExtrapolationUnstable(HypwaveError, RuntimeError):
    """A limit extrapolation fit is not trustworthy."""
