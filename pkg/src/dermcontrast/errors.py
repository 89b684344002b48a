"""Exception types shared across the package."""


class InputDomainError(ValueError):
    """An input value lies outside the documented domain of an operation."""


class ProtocolViolation(ValueError):
    """An annotation breaks the labeling protocol (wrong point count, etc.)."""


class UndefinedMetricError(ValueError):
    """A metric is undefined for the given input (e.g. AUC on one class)."""
