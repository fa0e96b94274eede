"""
Experiment Configuration

Dataclasses for the experiment pipeline, loaded from the nested JSON layout of
config/example_config.json. Each section maps to one dataclass; unknown keys
are rejected.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from games.errors import ConfigError
from games.serialization import dataclass_from_dict, read_json
from solvers.ftpl import FtplConfig
from solvers.online_gradient import MirrorConfig

logger = logging.getLogger(__name__)

STRUCTURES = ("disjoint", "nondisjoint")
THETA_RECIPES = ("bernoulli", "ones")


def derive_seed(master: int, *keys: int) -> int:
    """Seed for one replication or cell, split from the master seed.

    The first 64-bit word of SeedSequence([master, *keys]); the same keys
    always give the same seed, independent of execution order.
    """
    sequence = np.random.SeedSequence([int(master), *(int(k) for k in keys)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _check_range(name: str, bounds) -> Tuple[float, float]:
    try:
        low, high = (float(b) for b in bounds)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{name} must be a [low, high] pair") from e
    if not 0.0 <= low <= high <= 1.0:
        raise ConfigError(f"{name} must satisfy 0 <= low <= high <= 1, got [{low}, {high}]")
    return low, high


@dataclass
class GeneratorConfig:
    """Synthetic instance recipe: uniform degree, uniform probabilities, Bernoulli bits"""

    num_channels: int = 30
    num_voters: int = 150
    min_degree: int = 1
    max_degree: int = 5
    p_range: Tuple[float, float] = (0.0, 0.2)
    q_range: Tuple[float, float] = (0.0, 0.2)
    theta_recipe: str = "bernoulli"
    theta_probability: float = 0.5
    disjoint: bool = False
    attacker_budget: int = 3
    defender_budget: int = 3

    def __post_init__(self):
        self.p_range = tuple(self.p_range)  # type: ignore[assignment]
        self.q_range = tuple(self.q_range)  # type: ignore[assignment]

    def validate(self):
        if self.num_channels < 1 or self.num_voters < 1:
            raise ConfigError("need at least one channel and one voter")
        if not 1 <= self.min_degree <= self.max_degree:
            raise ConfigError(
                f"degree range must satisfy 1 <= min <= max, got "
                f"[{self.min_degree}, {self.max_degree}]"
            )
        if not self.disjoint and self.max_degree > self.num_channels:
            raise ConfigError(
                f"voter degree {self.max_degree} exceeds the {self.num_channels} channels"
            )
        _check_range("p_range", self.p_range)
        _check_range("q_range", self.q_range)
        if self.theta_recipe not in THETA_RECIPES:
            raise ConfigError(f"Unknown theta recipe: {self.theta_recipe}")
        if not 0.0 <= self.theta_probability <= 1.0:
            raise ConfigError(f"theta probability must lie in [0, 1], got {self.theta_probability}")
        budgets = (("attacker", self.attacker_budget), ("defender", self.defender_budget))
        for name, budget in budgets:
            if not 1 <= budget <= self.num_channels:
                raise ConfigError(f"{name} budget {budget} outside [1, {self.num_channels}]")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "num_channels": self.num_channels,
            "num_voters": self.num_voters,
            "min_degree": self.min_degree,
            "max_degree": self.max_degree,
            "p_range": list(self.p_range),
            "q_range": list(self.q_range),
            "theta_recipe": self.theta_recipe,
            "theta_probability": self.theta_probability,
            "disjoint": self.disjoint,
            "attacker_budget": self.attacker_budget,
            "defender_budget": self.defender_budget,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GeneratorConfig":
        return dataclass_from_dict(cls, data, "generator")


@dataclass
class SolverSelection:
    """Solver family the runners use: FTPL for disjoint, online gradient otherwise"""

    structure: str = "nondisjoint"

    def validate(self):
        if self.structure not in STRUCTURES:
            raise ConfigError(f"Unknown population structure: {self.structure}")

    def to_dict(self) -> Dict[str, Any]:
        return {"structure": self.structure}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SolverSelection":
        return dataclass_from_dict(cls, data, "solver")


@dataclass
class SweepConfig:
    """Budget grid shared by the gap table and the budget sweep"""

    attacker_budgets: List[int] = field(default_factory=lambda: [3, 5])
    defender_budgets: List[int] = field(default_factory=lambda: [3, 5])

    def validate(self, num_channels: int):
        for name, values, low in (
            ("attacker_budgets", self.attacker_budgets, 1),
            ("defender_budgets", self.defender_budgets, 0),
        ):
            if not values:
                raise ConfigError(f"{name} must be nonempty")
            for k in values:
                if not low <= k <= num_channels:
                    raise ConfigError(f"{name} entry {k} outside [{low}, {num_channels}]")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "attacker_budgets": list(self.attacker_budgets),
            "defender_budgets": list(self.defender_budgets),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepConfig":
        return dataclass_from_dict(cls, data, "sweep")


@dataclass
class UncertaintyConfig:
    """Settings of the known / stochastic / asymmetric / adversarial comparison"""

    num_samples: int = 20
    marginal: float = 0.5
    flip_budgets: List[int] = field(default_factory=lambda: [0, 2, 4, 8])
    tolerance: float = 0.15

    def validate(self, num_voters: int):
        if self.num_samples < 1:
            raise ConfigError(f"num_samples must be at least 1, got {self.num_samples}")
        if not 0.0 <= self.marginal <= 1.0:
            raise ConfigError(f"marginal must lie in [0, 1], got {self.marginal}")
        if not self.flip_budgets:
            raise ConfigError("flip_budgets must be nonempty")
        for flips in self.flip_budgets:
            if not 0 <= flips <= num_voters:
                raise ConfigError(f"flip budget {flips} outside [0, {num_voters}]")
        if self.tolerance < 0:
            raise ConfigError(f"tolerance must be nonnegative, got {self.tolerance}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "num_samples": self.num_samples,
            "marginal": self.marginal,
            "flip_budgets": list(self.flip_budgets),
            "tolerance": self.tolerance,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "UncertaintyConfig":
        return dataclass_from_dict(cls, data, "uncertainty")


SECTIONS = ("generator", "solver", "ftpl", "mirror", "sweep", "uncertainty", "experiment")
EXPERIMENT_KEYS = ("replications", "seed", "output_dir", "workers")


@dataclass
class ExperimentConfig:
    """Everything one experiment run needs; the master seed drives all randomness"""

    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    solver: SolverSelection = field(default_factory=SolverSelection)
    ftpl: FtplConfig = field(default_factory=FtplConfig)
    mirror: MirrorConfig = field(default_factory=MirrorConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    uncertainty: UncertaintyConfig = field(default_factory=UncertaintyConfig)
    replications: int = 10
    seed: int = 0
    output_dir: str = "results"
    workers: int = 1

    def validate(self):
        if self.replications < 1:
            raise ConfigError(f"replications must be at least 1, got {self.replications}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        self.generator.validate()
        self.solver.validate()
        self.ftpl.validate()
        self.mirror.validate()
        self.sweep.validate(self.generator.num_channels)
        self.uncertainty.validate(self.generator.num_voters)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "generator": self.generator.to_dict(),
            "solver": self.solver.to_dict(),
            "ftpl": self.ftpl.to_dict(),
            "mirror": self.mirror.to_dict(),
            "sweep": self.sweep.to_dict(),
            "uncertainty": self.uncertainty.to_dict(),
            "experiment": {
                "replications": self.replications,
                "seed": self.seed,
                "output_dir": self.output_dir,
                "workers": self.workers,
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            raise ConfigError(f"unknown configuration sections: {', '.join(unknown)}")
        experiment = data.get("experiment", {})
        unknown = sorted(set(experiment) - set(EXPERIMENT_KEYS))
        if unknown:
            raise ConfigError(f"unknown keys in 'experiment': {', '.join(unknown)}")
        config = cls(
            generator=GeneratorConfig.from_dict(data.get("generator", {})),
            solver=SolverSelection.from_dict(data.get("solver", {})),
            ftpl=FtplConfig.from_dict(data.get("ftpl", {})),
            mirror=MirrorConfig.from_dict(data.get("mirror", {})),
            sweep=SweepConfig.from_dict(data.get("sweep", {})),
            uncertainty=UncertaintyConfig.from_dict(data.get("uncertainty", {})),
            **experiment,
        )
        config.validate()
        return config

    @classmethod
    def from_json_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        logger.info("Loading experiment configuration from %s", path)
        return cls.from_dict(read_json(path))
