"""Exception and warning types raised by the engines."""


class StressDistError(Exception):
    """Base class for all computation errors in this package."""


class GridTooCoarse(StressDistError):
    """The discrete Hilbert transform failed its involution self-check."""


class EdgeLeak(StressDistError):
    """A grid function has not decayed at the grid edges."""


class NegativeWindow(StressDistError):
    """A window that must be nonnegative takes negative values."""


class FlowPole(StressDistError):
    """The requested flow parameter lies at or past the pole of the flow."""


class OutOfRadius(StressDistError):
    """The cumulant generating function was requested outside its domain."""


class NotGammaLike(StressDistError):
    """Moments are not right-skewed, so no shifted Gamma fits them."""


class DegenerateMoments(StressDistError):
    """Moments have nonpositive variance."""


class Intractable(StressDistError):
    """The requested order exceeds the configured computation budget."""


class MismatchAgainstGolden(StressDistError):
    """A recomputed table entry differs from its embedded golden value."""


class TailTruncation(UserWarning):
    """A characteristic function had not decayed at the integration cutoff."""
