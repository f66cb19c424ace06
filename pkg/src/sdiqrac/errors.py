"""Exception types shared across the package."""


class SdiqracError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SdiqracError, ValueError):
    """An input violates a documented precondition (range, shape, norm)."""


class BranchError(SdiqracError):
    """A closed form valid only on one branch of the bias regime was
    requested on the other branch."""


class DomainError(SdiqracError):
    """A quantity left the analytically chartered domain (arcsin argument
    above 1, infeasible bias pair, infeasible guessing-probability
    constraint).  Raised instead of extrapolating."""


class SearchError(SdiqracError):
    """A numerical search failed to bracket its target; the message carries
    the diagnostic instead of silently falling back."""
