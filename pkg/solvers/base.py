"""
Base Equilibrium Solver Class

This module contains the abstract base class shared by the no-regret
equilibrium solvers, and the SolveReport they return.
"""

import csv
import io
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from games.errors import ResourceError
from games.game_model import GameInstance, MixedStrategy
from games.oracles import DEFAULT_ENUMERATION_CAP, GapCertificate, optimality_gap
from games.payoffs import AttackerStrategy, check_weights

logger = logging.getLogger(__name__)


@dataclass
class SolveReport:
    """Defender strategy produced by a solver, with its diagnostics"""

    solver: str
    defender: MixedStrategy
    iterations: int
    parameters: Dict[str, Any]
    history: List[Dict[str, Any]] = field(default_factory=list)
    attacker: Optional[MixedStrategy] = None
    empirical_value: Optional[float] = None
    certificate: Optional[GapCertificate] = None
    regret_term: Optional[float] = None
    marginal_trace: List[np.ndarray] = field(default_factory=list, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable report; the marginal trace is summarized by its length"""
        return {
            "solver": self.solver,
            "iterations": self.iterations,
            "parameters": dict(self.parameters),
            "defender": self.defender.to_dict(),
            "attacker": self.attacker.to_dict() if self.attacker is not None else None,
            "empirical_value": self.empirical_value,
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "regret_term": self.regret_term,
            "marginal_trace_length": len(self.marginal_trace),
        }

    def history_csv(self) -> str:
        """Per-iteration trace as comma-separated text with a header row"""
        if not self.history:
            return ""
        columns = list(self.history[0].keys())
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in self.history:
            writer.writerow([_cell(row[column]) for column in columns])
        return buffer.getvalue()


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return " ".join(str(v) for v in value)
    return str(value)


class EquilibriumSolver(ABC):
    """Abstract base class for equilibrium solvers"""

    def __init__(self, instance: GameInstance, weights):
        """
        Initialize solver

        Args:
            instance: Game instance the players compete on
            weights: Per-voter preference weights in [0, 1]
        """
        self.instance = instance
        self.weights = check_weights(instance, weights)
        self.iteration_history: List[Dict[str, Any]] = []

    @abstractmethod
    def solve(self) -> SolveReport:
        """Run the solver to completion"""
        pass

    @abstractmethod
    def get_solver_name(self) -> str:
        """Get the name of this solver"""
        pass

    @abstractmethod
    def get_solver_description(self) -> str:
        """Get description of this solver"""
        pass

    def record_iteration(self, iteration: int, **values: Any):
        """Record one iteration for history tracking"""
        self.iteration_history.append({"iteration": iteration, **values})

    def certify(
        self,
        defender: MixedStrategy,
        attacker: AttackerStrategy,
        cap: int = DEFAULT_ENUMERATION_CAP,
        instance: Optional[GameInstance] = None,
    ) -> Optional[GapCertificate]:
        """Exact value bracket for the solution, or None if enumeration is too large"""
        target = self.instance if instance is None else instance
        try:
            return optimality_gap(target, self.weights, defender, attacker, cap)
        except ResourceError as e:
            logger.warning("Skipping certificate: %s", e)
            return None
