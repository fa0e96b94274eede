"""
Monte-Carlo simulation of the switching process, used to cross-check the
closed-form payoff.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import DomainError
from .game_model import GameInstance, PureStrategy, check_pure_strategy
from .payoffs import check_weights

logger = logging.getLogger(__name__)

EVENTS_PER_CHUNK = 2_000_000


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    trials: int

    def within(self, value: float, num_stderr: float = 3.0) -> bool:
        """True if ``value`` lies within ``num_stderr`` standard errors of the mean"""
        return abs(self.mean - value) <= num_stderr * self.stderr + 1e-12


def _incidence(inst: GameInstance, mask: np.ndarray) -> sparse.csr_matrix:
    """Voter-by-edge incidence matrix restricted to the masked edges"""
    voters = inst.voters[mask]
    return sparse.csr_matrix(
        (np.ones(voters.shape[0]), (voters, np.arange(voters.shape[0]))),
        shape=(inst.num_voters, voters.shape[0]),
    )


def monte_carlo_payoff(
    inst: GameInstance,
    theta,
    defender: PureStrategy,
    attacker: PureStrategy,
    trials: int,
    seed: int,
) -> MonteCarloEstimate:
    """Estimate the expected number of switches by direct simulation.

    Each trial draws an immunization event with probability q_uv on every
    defended edge and a reach event with probability p_uv on every attacked
    edge. A voter switches if it is reached and not immunized; it counts with
    its preference weight, or with weight 1 if its pseudo-channel was attacked.
    """
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    w = check_weights(inst, theta)
    check_pure_strategy(inst, defender, "defender", enforce_budget=False)
    check_pure_strategy(inst, attacker, "attacker", enforce_budget=False)

    counted = w.copy()
    if inst.is_extended:
        chosen = attacker.as_array()
        counted[chosen[chosen >= inst.num_real_channels] - inst.num_real_channels] = 1.0

    defended = np.isin(inst.channels, defender.as_array())
    attacked = np.isin(inst.channels, attacker.as_array())
    q_defended, p_attacked = inst.q[defended], inst.p[attacked]
    immunize, reach = _incidence(inst, defended), _incidence(inst, attacked)

    rng = np.random.default_rng(seed)
    switches = np.zeros(trials)
    edges_per_trial = max(int(defended.sum() + attacked.sum()), 1)
    chunk = max(1, EVENTS_PER_CHUNK // edges_per_trial)
    for start in range(0, trials, chunk):
        size = min(chunk, trials - start)
        immune_events = (rng.random((size, q_defended.shape[0])) < q_defended).astype(float)
        reach_events = (rng.random((size, p_attacked.shape[0])) < p_attacked).astype(float)
        immune = (immunize @ immune_events.T).T > 0
        reached = (reach @ reach_events.T).T > 0
        switches[start : start + size] = (reached & ~immune) @ counted

    mean = float(switches.mean())
    stderr = float(switches.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    logger.debug("Monte-Carlo payoff over %d trials: %.6f +/- %.6f", trials, mean, stderr)
    return MonteCarloEstimate(mean=mean, stderr=stderr, trials=trials)
