"""Exception and warning types shared across the package."""


class NonlocalOpticsError(Exception):
    """Base class for all library errors."""


class ParameterError(NonlocalOpticsError, ValueError):
    """A physical parameter violates its invariant."""


class GridError(ParameterError):
    """A grid cannot represent the requested state (span, resolution, overlap)."""


class DomainError(NonlocalOpticsError, ValueError):
    """An operation received a state in the wrong domain (time vs frequency)."""


class ConvergenceError(NonlocalOpticsError, ArithmeticError):
    """A numerical refinement did not reach its tolerance."""


class RegimeWarning(UserWarning):
    """The parameters fall outside the regime where a result is expected to hold."""


class FarFieldWarning(RegimeWarning):
    """The far-field approximation r >> c*dt is not well satisfied."""
