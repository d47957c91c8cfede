"""Exception types shared across the package."""


class BudgetExceededError(ValueError):
    """Raised when a word level ``k**n`` exceeds the enumeration budget."""


class DomainError(ValueError):
    """Raised when a point falls outside the ambient domain of a system."""


class CommutationError(ValueError):
    """Raised when a proposed conjugacy does not commute with the generators."""


class SolverError(RuntimeError):
    """Raised when Bowen's equation cannot be bracketed at the current scale.

    The partially evaluated pressure curve is attached as ``curve``.
    """

    def __init__(self, message, curve=None):
        super().__init__(message)
        self.curve = curve


class ConfigError(ValueError):
    """Raised for malformed experiment configurations.

    ``field`` names the offending key (dotted path) when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
