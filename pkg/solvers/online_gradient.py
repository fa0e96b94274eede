"""
Online Gradient Solvers

Equilibrium computation for nondisjoint populations. The attacker runs online
mirror ascent over fractional marginals x (channel u attacked independently
with probability x_u) on the multilinear extension F(x | S_d); each round the
defender plays a greedy best response to the current marginals. The uniform
mixture over the greedy defenses is the defender's output.

Two update rules are supported: projected gradient ascent (Euclidean) and
exponentiated gradient (entropic projection).
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from games.errors import DomainError, ResourceError
from games.game_model import GameInstance, MarginalVector, MixedStrategy, PureStrategy
from games.oracles import (
    GapCertificate,
    exact_attacker_best_response,
    exact_defender_best_response,
)
from games.payoffs import (
    check_weights,
    multilinear_gradient,
    reach_profile,
    survival_profile,
)
from games.projections import EntropicMode, Geometry, project_partition
from games.serialization import dataclass_from_dict
from games.uncertainty import adversarial_extend

from .base import EquilibriumSolver, SolveReport
from .greedy import greedy_best_response

logger = logging.getLogger(__name__)

# Step size used for the 50-iteration runs reported for this method
EXPERIMENT_STEP_SIZE = 0.05
EXPERIMENT_ITERATIONS = 50


class UpdateRule(Enum):
    EUCLIDEAN = "euclidean"
    EXPONENTIATED = "exponentiated"


class Initialization(Enum):
    SCALED = "scaled"  # 1 / (m k) per coordinate
    UNIFORM = "uniform"  # k / m per coordinate


@dataclass
class MirrorConfig:
    """Settings for the online gradient solvers"""

    iterations: int = EXPERIMENT_ITERATIONS  # 0 = derive from epsilon
    step_size: Optional[float] = None  # None or 0 = derive
    update_rule: UpdateRule = UpdateRule.EXPONENTIATED
    budget_expansion: float = 1.0
    epsilon: float = 0.1
    initialization: Initialization = Initialization.SCALED
    entropic_mode: EntropicMode = EntropicMode.CLOSED_FORM
    lazy_greedy: bool = True
    certify: bool = False

    def __post_init__(self):
        self.update_rule = UpdateRule(self.update_rule)
        self.initialization = Initialization(self.initialization)
        self.entropic_mode = EntropicMode(self.entropic_mode)

    def validate(self):
        if self.iterations < 0:
            raise DomainError(f"iterations must be nonnegative, got {self.iterations}")
        if self.budget_expansion < 1:
            raise DomainError(f"budget expansion must be >= 1, got {self.budget_expansion}")
        if self.step_size is not None and self.step_size < 0:
            raise DomainError(f"step size must be positive, got {self.step_size}")
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")

    def defender_budget(self, k_d: int) -> int:
        return math.ceil(self.budget_expansion * k_d - 1e-12)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iterations": self.iterations,
            "step_size": self.step_size,
            "update_rule": self.update_rule.value,
            "budget_expansion": self.budget_expansion,
            "epsilon": self.epsilon,
            "initialization": self.initialization.value,
            "entropic_mode": self.entropic_mode.value,
            "lazy_greedy": self.lazy_greedy,
            "certify": self.certify,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MirrorConfig":
        return dataclass_from_dict(cls, data, "mirror")


@dataclass(frozen=True)
class RegretConstants:
    """Gradient bound L, diameter D and largest single-channel payoff b"""

    lipschitz: float
    diameter: float
    max_single_payoff: float

    def step_size(self, iterations: int) -> float:
        """eta = 1 / (L sqrt(2T))"""
        return 1.0 / (max(self.lipschitz, 1e-12) * math.sqrt(2.0 * iterations))

    def regret_term(self, iterations: int) -> float:
        """sqrt(2) L D / sqrt(T), the attacker's average regret bound"""
        return math.sqrt(2.0) * self.lipschitz * self.diameter / math.sqrt(iterations)


def regret_constants(
    inst: GameInstance, weights, update_rule: UpdateRule, budget: float
) -> RegretConstants:
    """Regret constants of mirror ascent over the capped simplex of a budget.

    b = max_u f(empty, {u}); the empty defense maximizes every single-channel
    payoff. Euclidean: L = b sqrt(m), D = sqrt(k). Exponentiated: L = b,
    D = k log m.
    """
    w = check_weights(inst, weights)
    single = np.bincount(
        inst.channels, weights=w[inst.voters] * inst.p, minlength=inst.num_channels
    )
    if inst.is_extended:
        single[inst.num_real_channels :] = 1.0
    b = float(single.max()) if single.size else 0.0
    m = inst.num_channels
    if UpdateRule(update_rule) is UpdateRule.EUCLIDEAN:
        return RegretConstants(b * math.sqrt(m), math.sqrt(budget), b)
    return RegretConstants(b, budget * math.log(m), b)


def iterations_for_mirror(constants: RegretConstants, epsilon: float) -> int:
    """T = ceil((4 sqrt(2) L D / epsilon)^2)"""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    scale = 4.0 * math.sqrt(2.0) * constants.lipschitz * constants.diameter / epsilon
    return max(1, math.ceil(scale**2))


def theoretical_budget_expansion(n: int, epsilon: float) -> float:
    """alpha = ln(n / epsilon), the defender budget factor of the bicriteria guarantee"""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    return max(1.0, math.log(n / epsilon))


def bicriteria_bound(
    tau: float,
    epsilon: float,
    constants: RegretConstants,
    iterations: int,
    adversarial: bool = False,
) -> float:
    """Upper bound on the attacker's best-response value against the output mixture.

    2 (tau + eps + sqrt(2) L D / sqrt(T)), or 2 (tau + eps + L^2 D^2 / (2 sqrt(T)))
    in the adversarial form.
    """
    if adversarial:
        regret = (constants.lipschitz * constants.diameter) ** 2 / (2.0 * math.sqrt(iterations))
    else:
        regret = constants.regret_term(iterations)
    return 2.0 * (tau + epsilon + regret)


def sample_count_asymmetric(n: int, m: int, iterations: int, epsilon: float, delta: float) -> int:
    """Preference samples for the asymmetric solver: n^2 m T / eps^2 log(1/delta) log m.

    The leading constant is set to 1.
    """
    if min(n, m, iterations) <= 0 or not epsilon > 0 or not 0 < delta < 1:
        raise DomainError("sample count needs positive n, m, T, epsilon and delta in (0, 1)")
    value = n * n * m * iterations / epsilon**2 * math.log(1.0 / delta) * math.log(m)
    return max(1, math.ceil(value))


@dataclass(frozen=True)
class _Block:
    indices: np.ndarray
    budget: int


class OnlineGradientSolver(EquilibriumSolver):
    """Mirror ascent for the attacker against greedy defender responses.

    Given several preference samples the solver keeps one marginal vector per
    sample and the greedy defends against their average blocked influence; a
    single sample is the plain algorithm.
    """

    def __init__(
        self,
        instance: GameInstance,
        weights,
        config: MirrorConfig,
        samples: Optional[Sequence[np.ndarray]] = None,
    ):
        super().__init__(instance, weights)
        config.validate()
        self.config = config
        sample_list = [self.weights] if samples is None else list(samples)
        if not sample_list:
            raise DomainError("need at least one preference sample")
        self.sample_weights = [check_weights(instance, w) for w in sample_list]
        self.blocks = self._blocks()
        self.constants = regret_constants(
            instance,
            self.weights,
            config.update_rule,
            sum(block.budget for block in self.blocks),
        )

    def get_solver_name(self) -> str:
        if self.instance.is_extended:
            return "og-adversarial"
        if len(self.sample_weights) > 1:
            return "og-asymmetric"
        return "online-gradient"

    def get_solver_description(self) -> str:
        return (
            f"Online {self.config.update_rule.value} mirror ascent for the attacker "
            f"against greedy defender responses"
        )

    def _blocks(self) -> List[_Block]:
        inst = self.instance
        m_real = inst.num_real_channels
        blocks = [_Block(np.arange(m_real), inst.attacker_budget)]
        if inst.is_extended:
            blocks.append(_Block(np.arange(m_real, inst.num_channels), inst.flip_budget))
        return blocks

    def resolved_iterations(self) -> int:
        if self.config.iterations:
            return self.config.iterations
        return iterations_for_mirror(self.constants, self.config.epsilon)

    def step_size(self) -> float:
        if self.config.step_size:
            return float(self.config.step_size)
        rounds = self.resolved_iterations()
        if rounds == EXPERIMENT_ITERATIONS:
            return EXPERIMENT_STEP_SIZE
        return self.constants.step_size(rounds)

    def initial_marginals(self) -> np.ndarray:
        x = np.zeros(self.instance.num_channels)
        for block in self.blocks:
            size = block.indices.shape[0]
            if block.budget == 0 or size == 0:
                continue
            if self.config.initialization is Initialization.SCALED:
                x[block.indices] = 1.0 / (size * block.budget)
            else:
                x[block.indices] = block.budget / size
        return x

    def marginal(self, values: np.ndarray) -> MarginalVector:
        inst = self.instance
        return MarginalVector(
            values,
            budget=float(inst.attacker_budget),
            flip_budget=float(inst.flip_budget),
            num_pseudo=inst.num_pseudo_channels,
        )

    def update(self, x: np.ndarray, gradient: np.ndarray, step: float) -> np.ndarray:
        """One mirror-ascent step followed by block-wise projection"""
        if self.config.update_rule is UpdateRule.EUCLIDEAN:
            target = x + step * gradient
            geometry = Geometry.EUCLIDEAN
        else:
            target = np.maximum(x * np.exp(step * gradient), np.finfo(float).tiny)
            geometry = Geometry.ENTROPIC
        blocks: List[Tuple[Sequence[int], float]] = [
            (block.indices, block.budget) for block in self.blocks
        ]
        return project_partition(target, blocks, geometry, self.config.entropic_mode)

    def run(self) -> Tuple[List[PureStrategy], List[List[np.ndarray]]]:
        """Play T rounds; returns the defenses and, per sample, the marginals played"""
        inst = self.instance
        cfg = self.config
        rounds = self.resolved_iterations()
        step = self.step_size()
        budget = cfg.defender_budget(inst.defender_budget)
        num_samples = len(self.sample_weights)
        logger.info(
            "Running %s on %s: T=%d, eta=%.4g, greedy budget %d, %d samples",
            self.get_solver_name(),
            inst,
            rounds,
            step,
            budget,
            num_samples,
        )

        current = [self.initial_marginals() for _ in range(num_samples)]
        played: List[List[np.ndarray]] = [[] for _ in range(num_samples)]
        defenses: List[PureStrategy] = []
        for t in range(1, rounds + 1):
            marginals = [self.marginal(x) for x in current]
            reach = np.zeros(inst.num_voters)
            for w, marginal in zip(self.sample_weights, marginals):
                reach += reach_profile(inst, w, marginal)
            reach = reach / num_samples
            defense = greedy_best_response(inst, None, reach, budget, lazy=cfg.lazy_greedy)
            defenses.append(defense)

            survival = survival_profile(inst, defense)
            value = float(np.dot(survival, reach))
            blocked = float(np.dot(1.0 - survival, reach))
            self.record_iteration(t, value=value, blocked=blocked, defense=defense.channels)
            logger.debug(
                "Iteration %d/%d: F=%.5f g=%.5f S_d=%s", t, rounds, value, blocked, defense
            )

            for j, (w, marginal) in enumerate(zip(self.sample_weights, marginals)):
                played[j].append(marginal.values)
                gradient = multilinear_gradient(inst, w, marginal, defense)
                current[j] = self.update(current[j], gradient, step)
        return defenses, played

    def solve(self) -> SolveReport:
        defenses, played = self.run()
        rounds = len(defenses)
        defender = MixedStrategy.uniform(defenses)
        reach = np.mean(
            [
                reach_profile(self.instance, w, [self.marginal(x) for x in trace])
                for w, trace in zip(self.sample_weights, played)
            ],
            axis=0,
        )
        value = float(np.dot(survival_profile(self.instance, defender), reach))
        certificate = self._certificate(defender, reach) if self.config.certify else None
        logger.info("%s finished: value vs marginals %.4f", self.get_solver_name(), value)
        return SolveReport(
            solver=self.get_solver_name(),
            defender=defender,
            iterations=rounds,
            parameters={
                **self.config.to_dict(),
                "iterations": rounds,
                "step_size": self.step_size(),
            },
            history=self.iteration_history,
            empirical_value=value,
            certificate=certificate,
            regret_term=self.constants.regret_term(rounds),
            marginal_trace=played[0],
        )

    def _certificate(self, defender: MixedStrategy, reach: np.ndarray) -> Optional[GapCertificate]:
        """b_u averages per-sample exact attacker responses; b_l answers the mean reach"""
        try:
            responses = [
                exact_attacker_best_response(self.instance, w, defender)
                for w in self.sample_weights
            ]
            defender_response, lower = exact_defender_best_response(self.instance, None, reach)
        except ResourceError as e:
            logger.warning("Skipping certificate: %s", e)
            return None
        return GapCertificate(
            upper=float(np.mean([value for _, value in responses])),
            lower=lower,
            attacker_response=responses[0][0],
            defender_response=defender_response,
        )


def online_gradient_solve(inst: GameInstance, weights, cfg: MirrorConfig) -> SolveReport:
    """Online gradient equilibrium computation for a known (or marginal) weight vector"""
    return OnlineGradientSolver(inst, weights, cfg).solve()


def og_asymmetric(
    inst: GameInstance, samples: Sequence[np.ndarray], cfg: MirrorConfig
) -> SolveReport:
    """Defender against an attacker who observes the realized preference sample"""
    samples = [np.asarray(s, dtype=float) for s in samples]
    if not samples:
        raise DomainError("need at least one preference sample")
    return OnlineGradientSolver(inst, samples[0], cfg, samples=samples).solve()


def og_adversarial(
    inst: GameInstance, theta_hat, flip_budget: int, cfg: MirrorConfig
) -> SolveReport:
    """Defender against an attacker who may also flip ``flip_budget`` preferences"""
    extension = adversarial_extend(inst, theta_hat, flip_budget)
    return OnlineGradientSolver(extension.instance, extension.weights, cfg).solve()
