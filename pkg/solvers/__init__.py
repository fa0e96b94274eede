"""
Equilibrium Solvers

No-regret dynamics that compute approximate minimax defender strategies:
Follow-The-Perturbed-Leader for disjoint populations and online gradient
ascent with greedy defender responses for nondisjoint ones. Each solver has
variants for sampled and adversarial preference uncertainty.
"""

from .base import EquilibriumSolver, SolveReport
from .factory import SolverFactory
from .ftpl import FtplAdversarialSolver, FtplConfig, FtplSolver
from .greedy import greedy_best_response
from .online_gradient import MirrorConfig, OnlineGradientSolver

__all__ = [
    "EquilibriumSolver",
    "SolveReport",
    "SolverFactory",
    "FtplConfig",
    "FtplSolver",
    "FtplAdversarialSolver",
    "greedy_best_response",
    "MirrorConfig",
    "OnlineGradientSolver",
]
