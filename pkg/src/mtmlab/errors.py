"""Exception types shared across the package."""


class MtmLabError(Exception):
    """Base class for all package errors."""


class UnsupportedTargetError(MtmLabError):
    """A closed-form path was requested for a target it does not cover."""


class DomainError(MtmLabError):
    """A log-density or formula input left its valid domain."""


class DegenerateSelectionError(MtmLabError):
    """Every candidate weight vanished; categorical selection is undefined."""


class EnumerationBudgetError(MtmLabError):
    """An exact-enumeration request exceeds the configured budget."""


class InvalidSetError(MtmLabError):
    """A conditioning set does not satisfy the estimator's requirements."""


class ConfigError(MtmLabError):
    """Experiment configuration failed validation."""

    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field
