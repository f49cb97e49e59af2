class ConfigError(ValueError):
    """Invalid or conflicting configuration."""


class DomainError(ValueError):
    """Argument outside the domain of a model equation."""


class OracleLimitError(RuntimeError):
    """Exhaustive enumeration refused because the subset count is too large."""


class SimulationError(RuntimeError):
    """A round could not be executed (e.g. no alive nodes, no cluster heads)."""
