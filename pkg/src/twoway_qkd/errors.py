"""Exception types raised by the library."""


class DomainError(ValueError):
    """An argument lies outside the domain on which a quantity is defined."""


class UndefinedRateError(DomainError):
    """A ratio (QBER, per-photon error) is requested for a zero detection probability."""


class PresetError(ValueError):
    """A channel preset file is missing, malformed or carries unknown keys."""
