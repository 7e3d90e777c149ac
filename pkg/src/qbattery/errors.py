"""Exception types shared across the package."""


class DimensionError(ValueError):
    """An operator or state has the wrong shape for the requested operation."""


class HermiticityError(ValueError):
    """An input that must be Hermitian is not, within tolerance."""


class DomainError(ValueError):
    """A scalar parameter is outside its physical domain."""


class ConfigError(ValueError):
    """A run configuration or search space is invalid."""
