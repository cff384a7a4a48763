"""Exception hierarchy shared by all modules."""


class MMSqueezeError(Exception):
    """Base class for package errors."""


class DomainError(MMSqueezeError, ValueError):
    """Input lies outside the domain where a model or formula is defined."""


class DegenerateSpectrumError(DomainError):
    pass


class InsufficientModesError(DomainError):
    pass


class NoCountsError(DomainError):
    pass


class ConfigError(MMSqueezeError):
    """Invalid run configuration (schema violation, unknown key, bad source)."""
