"""
Solver Factory

This module contains the SolverFactory class that picks an equilibrium solver
from the population structure and the kind of preference knowledge.
"""

from typing import List, Optional

from games.errors import StructureError
from games.game_model import (
    AdversarialPreferences,
    GameInstance,
    PreferenceModel,
    SampledPreferences,
)
from games.uncertainty import adversarial_extend, substitute_marginals

from .base import EquilibriumSolver
from .ftpl import FtplAdversarialSolver, FtplConfig, FtplSolver
from .online_gradient import MirrorConfig, OnlineGradientSolver

STRUCTURES = ("disjoint", "nondisjoint")


class SolverFactory:
    """Factory for creating equilibrium solvers"""

    @staticmethod
    def create_solver(
        structure: str,
        instance: GameInstance,
        preferences: PreferenceModel,
        ftpl_config: Optional[FtplConfig] = None,
        mirror_config: Optional[MirrorConfig] = None,
    ) -> EquilibriumSolver:
        """
        Create a solver for a population structure and preference model

        Args:
            structure: "disjoint" (FTPL) or "nondisjoint" (online gradient)
            instance: Game instance
            preferences: Known bits, marginals, samples or an adversarial ball
            ftpl_config: Settings for the disjoint solvers
            mirror_config: Settings for the nondisjoint solvers

        Returns:
            EquilibriumSolver instance
        """
        structure = structure.lower()
        if structure == "disjoint":
            config = ftpl_config or FtplConfig()
            if isinstance(preferences, AdversarialPreferences):
                return FtplAdversarialSolver(
                    instance, preferences.nominal, preferences.radius, config
                )
            if isinstance(preferences, SampledPreferences):
                samples = list(preferences.samples)
                return FtplSolver(instance, samples[0], config, samples=samples)
            return FtplSolver(instance, substitute_marginals(instance, preferences), config)
        elif structure == "nondisjoint":
            config = mirror_config or MirrorConfig()
            if isinstance(preferences, AdversarialPreferences):
                extension = adversarial_extend(instance, preferences.nominal, preferences.radius)
                return OnlineGradientSolver(extension.instance, extension.weights, config)
            if isinstance(preferences, SampledPreferences):
                samples = list(preferences.samples)
                return OnlineGradientSolver(instance, samples[0], config, samples=samples)
            return OnlineGradientSolver(
                instance, substitute_marginals(instance, preferences), config
            )
        else:
            raise StructureError(f"Unknown population structure: {structure}")

    @staticmethod
    def get_available_solvers() -> List[str]:
        """Get list of solver names by structure and preference kind"""
        return [
            "ftpl",
            "ftpl-asymmetric",
            "ftpl-adversarial",
            "online-gradient",
            "og-asymmetric",
            "og-adversarial",
        ]
