"""Semantic exception hierarchy shared across the package."""


class CopulaError(Exception):
    """Base error for this package."""


class DomainError(CopulaError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class InvalidMeasureError(CopulaError, ValueError):
    """A measure object violates its structural invariants."""


class NotMeasurePreservingError(CopulaError, ValueError):
    """A map fails Lebesgue measure preservation in some coordinate.

    Carries the offending coordinate (0-based), the witness interval and
    the measured preimage length.
    """

    def __init__(self, coord, interval, measured):
        self.coord = coord
        self.interval = interval
        self.measured = measured
        lo, hi = interval
        super().__init__(
            f"coordinate {coord} is not measure preserving: "
            f"preimage of [{lo}, {hi}] has length {measured} != {hi - lo}"
        )


class DecompositionError(CopulaError):
    """The dense-square hypothesis fails, so no mixing decomposition is built.

    ``zero_fraction`` is the measured volume fraction of the zero set inside
    the candidate square (must be < 1/4 for the decomposition to exist).
    """

    def __init__(self, message, zero_fraction=None):
        super().__init__(message)
        self.zero_fraction = zero_fraction


class RationalizationError(CopulaError):
    """Rounding to an exact rational grid measure missed its error target."""

    def __init__(self, message, achieved_rho=None):
        super().__init__(message)
        self.achieved_rho = achieved_rho


class ObjectiveSyntaxError(CopulaError, ValueError):
    """Objective expression could not be parsed; ``position`` is 1-based."""

    def __init__(self, message, position):
        super().__init__(f"{message} (column {position})")
        self.position = position
