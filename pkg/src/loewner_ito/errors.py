"""Exception hierarchy shared by every module."""


class LoewnerItoError(Exception):
    pass


class DomainError(LoewnerItoError, ValueError):
    """An argument lies outside the domain of a function (e.g. |w| >= 1)."""


class InvariantError(LoewnerItoError, ValueError):
    """A value object was constructed in violation of its invariants."""


class SizingError(LoewnerItoError, ValueError):
    pass


class ResolutionError(LoewnerItoError, ValueError):
    """Finite differences requested below the resolution of a sampled driver."""
