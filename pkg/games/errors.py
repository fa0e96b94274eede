"""
Error types for the election defense game library.

All errors derive from GameError, which is a ValueError so callers that
already guard numeric input with ``except ValueError`` keep working.
"""


class GameError(ValueError):
    """Base class for all library errors"""


class InvalidStrategyError(GameError):
    """A pure or mixed strategy is out of range, over budget or malformed"""


class StructureError(GameError):
    """The instance does not have the structure an operation requires"""


class DomainError(GameError):
    """A numeric argument lies outside the domain of an operation"""


class ResourceError(GameError):
    """An exhaustive enumeration would exceed its configured cap"""


class ConfigError(GameError):
    """Invalid experiment configuration or malformed input file"""


class InstanceError(GameError):
    """A game instance violates its invariants"""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("Invalid game instance: " + "; ".join(self.violations))
