"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An argument violated a documented precondition (dimension mismatch,
    non-monotone step sequence, empty record, malformed trace)."""


class DomainError(ValueError):
    """A point fell outside the domain a function oracle can answer for."""


class ConfigError(ValueError):
    """A run configuration is inconsistent with the problem's capabilities."""
