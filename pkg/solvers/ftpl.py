"""
Follow-The-Perturbed-Leader Solvers

Equilibrium computation for disjoint populations, where the payoff is linear in
each player's choice:

    f(S_d, S_a) = sum_{u in S_a} a_u - sum_{u in S_a and S_d} b_u

Each round both players add fresh uniform noise to their cumulative reward
vectors and play the top-k channels. The uniform distributions over the played
histories form an approximate equilibrium.

Reward convention: the attacker earns a_u - 1[u in S_d] b_u on channel u, the
defender earns 1[u in S_a] b_u (switches it averted). Both select the largest
perturbed cumulative rewards, ties to the lowest index.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from games.errors import DomainError, StructureError
from games.game_model import GameInstance, MixedStrategy, PureStrategy
from games.payoffs import check_weights, disjoint_decompose, expected_payoff
from games.projections import top_k
from games.serialization import dataclass_from_dict
from games.uncertainty import AdversarialExtension, adversarial_extend

from .base import EquilibriumSolver, SolveReport

logger = logging.getLogger(__name__)


@dataclass
class FtplConfig:
    """Settings for the FTPL solvers"""

    epsilon: float = 0.5
    iterations: int = 0  # 0 = derive from epsilon
    perturbation_scale: Optional[float] = None  # None = 1 / epsilon
    seed: int = 0
    certify: bool = False

    def validate(self):
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        if self.iterations < 0:
            raise DomainError(f"iterations must be nonnegative, got {self.iterations}")
        if self.perturbation_scale is not None and not self.perturbation_scale > 0:
            raise DomainError(
                f"perturbation scale must be positive, got {self.perturbation_scale}"
            )

    @property
    def scale(self) -> float:
        if self.perturbation_scale is None:
            return 1.0 / self.epsilon
        return float(self.perturbation_scale)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "iterations": self.iterations,
            "perturbation_scale": self.perturbation_scale,
            "seed": self.seed,
            "certify": self.certify,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FtplConfig":
        return dataclass_from_dict(cls, data, "ftpl")


def iterations_for_epsilon(
    n: int,
    attacker_budget: int,
    defender_budget: int,
    epsilon: float,
    flip_budget: int = 0,
    variant: str = "standard",
) -> int:
    """Rounds after which FTPL play is an epsilon-equilibrium.

    T = ceil(4 n^2 max(k_a, k_d) / epsilon^2); the adversarial variant uses
    k_a + flip_budget in place of k_a.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if variant not in ("standard", "adversarial"):
        raise ValueError(f"Unknown FTPL variant: {variant}")
    attack = attacker_budget + (flip_budget if variant == "adversarial" else 0)
    return math.ceil(4 * n * n * max(attack, defender_budget) / epsilon**2)


def _indicator(size: int, strategy: PureStrategy) -> np.ndarray:
    indicator = np.zeros(size)
    indicator[strategy.as_array()] = 1.0
    return indicator


def _lowest_set(size: int, k: int) -> PureStrategy:
    return PureStrategy(tuple(range(min(k, size))))


@dataclass
class FtplTrace:
    """Strategies played in rounds 1..T and the rewards they earned"""

    defender_history: List[PureStrategy] = field(default_factory=list)
    attacker_history: List[PureStrategy] = field(default_factory=list)
    defender_rewards: Optional[np.ndarray] = None
    attacker_rewards: Optional[np.ndarray] = None
    payoffs: List[float] = field(default_factory=list)
    defender_realized: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.defender_history)

    @property
    def defender_strategy(self) -> MixedStrategy:
        return MixedStrategy.uniform(self.defender_history)

    @property
    def attacker_strategy(self) -> MixedStrategy:
        return MixedStrategy.uniform(self.attacker_history)


@dataclass
class AsymmetricFtplTrace:
    """Shared defender trace plus one attacker trace per preference sample"""

    defender: FtplTrace
    attackers: List[FtplTrace]

    @property
    def defender_strategy(self) -> MixedStrategy:
        return self.defender.defender_strategy


class FtplSolver(EquilibriumSolver):
    """FTPL self-play on a disjoint instance.

    With several weight vectors the solver runs one attacker learner per vector
    and the defender learns from the average of their induced rewards; a single
    weight vector is the plain two-player dynamics.
    """

    def __init__(
        self,
        instance: GameInstance,
        weights,
        config: FtplConfig,
        samples: Optional[Sequence[np.ndarray]] = None,
    ):
        if not instance.is_disjoint:
            raise StructureError("FTPL requires a disjoint instance (one edge per voter)")
        super().__init__(instance, weights)
        config.validate()
        self.config = config
        sample_list = [self.weights] if samples is None else list(samples)
        if not sample_list:
            raise DomainError("need at least one preference sample")
        self.sample_weights = [check_weights(instance, w) for w in sample_list]
        self.rewards = [disjoint_decompose(instance, w) for w in self.sample_weights]

    def get_solver_name(self) -> str:
        if len(self.sample_weights) > 1:
            return "ftpl-asymmetric"
        return "ftpl"

    def get_solver_description(self) -> str:
        return "Follow-The-Perturbed-Leader self-play on the linear disjoint payoff"

    def resolved_iterations(self) -> int:
        if self.config.iterations:
            return self.config.iterations
        inst = self.instance
        return iterations_for_epsilon(
            inst.num_voters, inst.attacker_budget, inst.defender_budget, self.config.epsilon
        )

    def run(self) -> AsymmetricFtplTrace:
        """Play T rounds and return the full traces"""
        inst = self.instance
        m = inst.num_channels
        k_a, k_d = inst.attacker_budget, inst.defender_budget
        rounds = self.resolved_iterations()
        scale = self.config.scale
        rng = np.random.default_rng(self.config.seed)
        num_samples = len(self.rewards)
        logger.info(
            "Running %s on %s for %d rounds (%d samples)",
            self.get_solver_name(),
            inst,
            rounds,
            num_samples,
        )

        defender_start = _indicator(m, _lowest_set(m, k_d))
        attacker_start = _indicator(m, _lowest_set(m, k_a))
        attacker_totals = [a - b * defender_start for a, b in self.rewards]
        defender_total = np.mean([b * attacker_start for _, b in self.rewards], axis=0)

        attackers = [FtplTrace(attacker_rewards=np.zeros(m)) for _ in range(num_samples)]
        defender = FtplTrace(defender_rewards=np.zeros(m))
        for t in range(1, rounds + 1):
            noise = [rng.uniform(0.0, scale, m) for _ in range(num_samples)]
            defender_noise = rng.uniform(0.0, scale, m)
            plays = [top_k(attacker_totals[j] + noise[j], k_a) for j in range(num_samples)]
            defense = top_k(defender_total + defender_noise, k_d)

            defended = _indicator(m, defense)
            induced = []
            for j, ((a, b), play) in enumerate(zip(self.rewards, plays)):
                attacked = _indicator(m, play)
                attacker_reward = a - b * defended
                attacker_totals[j] += attacker_reward
                trace = attackers[j]
                trace.attacker_history.append(play)
                trace.defender_history.append(defense)
                trace.attacker_rewards += attacker_reward
                trace.payoffs.append(float(np.dot(attacker_reward, attacked)))
                induced.append(b * attacked)
            defender_reward = np.mean(induced, axis=0)
            defender_total += defender_reward

            defender.defender_history.append(defense)
            defender.defender_rewards += defender_reward
            defender.defender_realized.append(float(np.dot(defender_reward, defended)))
            defender.payoffs.append(float(np.mean([trace.payoffs[-1] for trace in attackers])))
            if t % 1000 == 0:
                logger.debug("Round %d/%d, payoff %.4f", t, rounds, defender.payoffs[-1])

        defender.attacker_history = attackers[0].attacker_history
        defender.attacker_rewards = attackers[0].attacker_rewards
        return AsymmetricFtplTrace(defender=defender, attackers=attackers)

    def solve(self) -> SolveReport:
        traces = self.run()
        defender = traces.defender_strategy
        attacker = traces.attackers[0].attacker_strategy
        value = float(
            np.mean(
                [
                    expected_payoff(self.instance, w, defender, trace.attacker_strategy)
                    for w, trace in zip(self.sample_weights, traces.attackers)
                ]
            )
        )
        certificate = None
        if self.config.certify and len(self.sample_weights) == 1:
            certificate = self.certify(defender, attacker)
        for t, payoff in enumerate(traces.defender.payoffs, start=1):
            self.record_iteration(
                t,
                payoff=payoff,
                defender_reward=traces.defender.defender_realized[t - 1],
                defense=traces.defender.defender_history[t - 1].channels,
            )
        logger.info("%s finished: empirical value %.4f", self.get_solver_name(), value)
        return SolveReport(
            solver=self.get_solver_name(),
            defender=defender,
            attacker=attacker if len(self.sample_weights) == 1 else None,
            iterations=len(traces.defender),
            parameters=self.config.to_dict(),
            history=self.iteration_history,
            empirical_value=value,
            certificate=certificate,
        )


class FtplAdversarialSolver(EquilibriumSolver):
    """FTPL when the attacker may also flip up to ``flip_budget`` voter preferences.

    Play happens on the extended instance: flipping voter v attacks its
    pseudo-channel, which reaches v with certainty and counts it with weight 1.
    Per voter the payoff is s_v * (F_v + (1 - F_v) w_v p_v 1[c(v) in S_a]), so it
    stays linear for the defender, who earns q_v times the extended reach of
    every voter it protects. The attacker's two blocks interact only through
    voters that are both flipped and covered by an attacked channel; its
    perturbed leader alternates top-k over real channels (budget k_a) and top-k
    over pseudo-channels (budget flip_budget) against the cumulative survival
    until neither block changes.
    """

    def __init__(
        self, instance: GameInstance, theta_hat, flip_budget: int, config: FtplConfig
    ):
        if not instance.is_disjoint:
            raise StructureError("FTPL requires a disjoint instance (one edge per voter)")
        super().__init__(instance, theta_hat)
        config.validate()
        self.config = config
        self.extension: AdversarialExtension = adversarial_extend(
            instance, self.weights, flip_budget
        )
        self.flip_budget = int(flip_budget)

    def get_solver_name(self) -> str:
        return "ftpl-adversarial"

    def get_solver_description(self) -> str:
        return "FTPL with a partition-constrained attacker over real and pseudo-channels"

    def resolved_iterations(self) -> int:
        if self.config.iterations:
            return self.config.iterations
        inst = self.instance
        return iterations_for_epsilon(
            inst.num_voters,
            inst.attacker_budget,
            inst.defender_budget,
            self.config.epsilon,
            flip_budget=self.flip_budget,
            variant="adversarial",
        )

    def survival(self, defended: np.ndarray) -> np.ndarray:
        """Per-voter survival under a defended-channel indicator"""
        inst = self.instance
        survival = np.ones(inst.num_voters)
        survival[inst.voters] = 1.0 - inst.q * defended[inst.channels]
        return survival

    def extended_reach(self, attacked: np.ndarray, flipped: np.ndarray) -> np.ndarray:
        """Per-voter reach on the extended instance; flipped voters are reached for sure"""
        inst = self.instance
        reach = flipped.copy()
        covered = self.weights[inst.voters] * inst.p * attacked[inst.channels]
        reach[inst.voters] = np.where(flipped[inst.voters] > 0.0, 1.0, covered)
        return reach

    def defender_reward(self, attacked: np.ndarray, flipped: np.ndarray) -> np.ndarray:
        """Payoff each channel would have blocked against one attack"""
        inst = self.instance
        blocked = inst.q * self.extended_reach(attacked, flipped)[inst.voters]
        return np.bincount(inst.channels, weights=blocked, minlength=inst.num_channels)

    def perturbed_leader(
        self,
        real_total: np.ndarray,
        cumulative_survival: np.ndarray,
        real_noise: np.ndarray,
        pseudo_noise: np.ndarray,
    ) -> Tuple[PureStrategy, PureStrategy]:
        """Attack maximizing the perturbed cumulative extended payoff.

        Block-coordinate ascent: each pass picks the best real block for the
        current flips, then the best flips for that real block. The objective
        never decreases, so the loop stops once the flips repeat.
        """
        inst = self.instance
        m, n = inst.num_channels, inst.num_voters
        k_a, flips = inst.attacker_budget, self.flip_budget
        # payoff already counted through the real block when a flipped voter is covered
        overlap = np.zeros(n)
        overlap[inst.voters] = cumulative_survival[inst.voters] * self.weights[inst.voters] * inst.p

        flipped_play = PureStrategy()
        if flips:
            flipped_play = top_k(cumulative_survival + pseudo_noise, flips)
        real_play = PureStrategy()
        for _ in range(m + n + 1):
            flipped = _indicator(n, flipped_play)
            shared = np.bincount(
                inst.channels, weights=overlap[inst.voters] * flipped[inst.voters], minlength=m
            )
            real_play = top_k(real_total - shared + real_noise, k_a)
            if not flips:
                break
            covered = np.zeros(n)
            covered[inst.voters] = _indicator(m, real_play)[inst.channels]
            best = top_k(cumulative_survival - overlap * covered + pseudo_noise, flips)
            if best == flipped_play:
                break
            flipped_play = best
        return real_play, flipped_play

    def run(self) -> FtplTrace:
        inst = self.instance
        m, n = inst.num_channels, inst.num_voters
        k_a, k_d, flips = inst.attacker_budget, inst.defender_budget, self.flip_budget
        rounds = self.resolved_iterations()
        scale = self.config.scale
        rng = np.random.default_rng(self.config.seed)
        a, b = disjoint_decompose(inst, self.weights)
        edge_reach = self.weights[inst.voters] * inst.p
        logger.info(
            "Running %s on %s for %d rounds (flip budget %d)",
            self.get_solver_name(),
            inst,
            rounds,
            flips,
        )

        defended = _indicator(m, _lowest_set(m, k_d))
        real_total = a - b * defended
        cumulative_survival = self.survival(defended)
        defender_total = self.defender_reward(_indicator(m, _lowest_set(m, k_a)), np.zeros(n))

        trace = FtplTrace(defender_rewards=np.zeros(m), attacker_rewards=np.zeros(m + n))
        for t in range(1, rounds + 1):
            real_noise = rng.uniform(0.0, scale, m)
            defender_noise = rng.uniform(0.0, scale, m)
            pseudo_noise = rng.uniform(0.0, scale, n) if flips else np.zeros(n)
            real_play, flipped_play = self.perturbed_leader(
                real_total, cumulative_survival, real_noise, pseudo_noise
            )
            defense = top_k(defender_total + defender_noise, k_d)

            attacked = _indicator(m, real_play)
            flipped = _indicator(n, flipped_play)
            defended = _indicator(m, defense)
            survival = self.survival(defended)
            real_reward = a - b * defended
            guard_reward = self.defender_reward(attacked, flipped)
            real_total += real_reward
            cumulative_survival += survival
            defender_total += guard_reward

            # marginal gains of each block given the other block's play
            real_gain = real_reward - np.bincount(
                inst.channels,
                weights=survival[inst.voters] * edge_reach * flipped[inst.voters],
                minlength=m,
            )
            flip_gain = survival.copy()
            flip_gain[inst.voters] -= survival[inst.voters] * edge_reach * attacked[inst.channels]

            play = PureStrategy(real_play.channels + tuple(m + v for v in flipped_play))
            trace.attacker_history.append(play)
            trace.defender_history.append(defense)
            trace.attacker_rewards += np.concatenate([real_gain, flip_gain])
            trace.defender_rewards += guard_reward
            trace.payoffs.append(float(np.dot(survival, self.extended_reach(attacked, flipped))))
            trace.defender_realized.append(float(np.dot(guard_reward, defended)))
            if t % 1000 == 0:
                logger.debug("Round %d/%d, payoff %.4f", t, rounds, trace.payoffs[-1])
        return trace

    def solve(self) -> SolveReport:
        trace = self.run()
        extended = self.extension.instance
        defender = trace.defender_strategy
        attacker = trace.attacker_strategy
        value = expected_payoff(extended, self.weights, defender, attacker)
        certificate = None
        if self.config.certify:
            certificate = self.certify(defender, attacker, instance=extended)
        for t, payoff in enumerate(trace.payoffs, start=1):
            self.record_iteration(t, payoff=payoff, defense=trace.defender_history[t - 1].channels)
        logger.info("%s finished: empirical value %.4f", self.get_solver_name(), value)
        return SolveReport(
            solver=self.get_solver_name(),
            defender=defender,
            attacker=attacker,
            iterations=len(trace),
            parameters={**self.config.to_dict(), "flip_budget": self.flip_budget},
            history=self.iteration_history,
            empirical_value=value,
            certificate=certificate,
        )


def ftpl_solve(inst: GameInstance, theta, cfg: FtplConfig) -> FtplTrace:
    """Run FTPL self-play and return the trace of rounds 1..T"""
    return FtplSolver(inst, theta, cfg).run().defender


def ftpl_asymmetric(
    inst: GameInstance, samples: Sequence[np.ndarray], cfg: FtplConfig
) -> AsymmetricFtplTrace:
    """FTPL with one attacker learner per preference sample"""
    samples = [np.asarray(s, dtype=float) for s in samples]
    if not samples:
        raise DomainError("need at least one preference sample")
    return FtplSolver(inst, samples[0], cfg, samples=samples).run()


def ftpl_adversarial(
    inst: GameInstance, theta_hat, flip_budget: int, cfg: FtplConfig
) -> FtplTrace:
    """FTPL against an attacker who may also flip ``flip_budget`` preferences"""
    return FtplAdversarialSolver(inst, theta_hat, flip_budget, cfg).run()
