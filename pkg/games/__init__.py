"""
Game Model Package

Core model of the attacker-defender misinformation game over advertising
channels and voters.

Main components:
- game_model.py: Instances, strategies and preference models
- payoffs.py: Exact payoff evaluation and the multilinear extension
- projections.py: Projections onto capped simplices
- oracles.py: Brute-force best responses, gap certificates and matrix games
- uncertainty.py: Reductions for uncertain voter preferences
- simulation.py: Monte-Carlo payoff estimates
- serialization.py: Instance and strategy files
"""

from .errors import (
    ConfigError,
    DomainError,
    GameError,
    InstanceError,
    InvalidStrategyError,
    ResourceError,
    StructureError,
)
from .game_model import (
    AdversarialPreferences,
    GameInstance,
    KnownPreferences,
    MarginalPreferences,
    MarginalVector,
    MixedStrategy,
    PreferenceKind,
    PureStrategy,
    SampledPreferences,
    validate_instance,
)
from .payoffs import expected_payoff, multilinear_extension, multilinear_gradient, payoff

__version__ = "1.0.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "GameError",
    "InstanceError",
    "InvalidStrategyError",
    "ResourceError",
    "StructureError",
    "AdversarialPreferences",
    "GameInstance",
    "KnownPreferences",
    "MarginalPreferences",
    "MarginalVector",
    "MixedStrategy",
    "PreferenceKind",
    "PureStrategy",
    "SampledPreferences",
    "validate_instance",
    "expected_payoff",
    "multilinear_extension",
    "multilinear_gradient",
    "payoff",
]
