"""Exception hierarchy shared by every module."""


class RssError(Exception):
    pass


class InvalidParameterError(RssError, ValueError):
    """A physical parameter violates its domain (negative speed, zero braking, ...)."""


class NotApplicableError(RssError):
    """The requested term only exists inside the mid-braking special case."""


class NoSafeDistanceError(RssError):
    """No finite following distance can be guaranteed (e.g. the rear vehicle cannot hold a grade)."""


class NoSafeGapError(RssError):
    """The oracle found no collision-free initial gap inside its bracket."""


class CurveInfeasibleError(NoSafeDistanceError):
    """Lateral demand of the curve alone exceeds the friction limit."""


class InconsistentEvidenceError(RssError):
    """Every hypothesis was assigned zero posterior weight."""


class InvalidConfigurationError(RssError, ValueError):
    pass


class UnitError(RssError, ValueError):
    pass
