"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Group data is inconsistent or an element does not belong to a group."""


class ResourceError(RuntimeError):
    """An exact computation would exceed the configured atom budget."""


class ConsistencyError(RuntimeError):
    """Two derivations disagree on a verdict; always an implementation bug."""


class ConfigError(ValueError):
    """A job configuration is malformed or out of domain."""
