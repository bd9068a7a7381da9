"""Exception types shared across the toolkit."""


class VowelkitError(Exception):
    """Base class for all toolkit errors."""


class InvalidInput(VowelkitError):
    """An argument violates a documented precondition."""


class TooShort(VowelkitError):
    """Signal shorter than one analysis frame; the caller may skip the token."""


class DegenerateSpectrum(VowelkitError):
    """Levinson-Durbin hit a non-positive prediction-error variance."""


class FormatError(VowelkitError):
    """A file does not conform to its declared on-disk format."""
