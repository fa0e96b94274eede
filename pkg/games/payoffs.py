"""
Payoff Evaluators

Closed-form evaluators for the expected number of switched voters:

    f(S_d, S_a) = sum_v w_v * prod_{u in S_d} (1 - q_uv) * (1 - prod_{u in S_a} (1 - p_uv))

Every evaluator factors into a per-voter survival profile (defense side) and a
per-voter reach profile (attack side). Because the two players randomize
independently, the expected payoff of any pair of mixtures is the dot product
of the two expected profiles. Preference weights are real numbers in [0, 1],
so known bits and Bernoulli marginals share one code path.
"""

import logging
from typing import Sequence, Tuple, Union

import numpy as np

from .errors import DomainError, StructureError
from .game_model import (
    GameInstance,
    MarginalVector,
    MixedStrategy,
    PureStrategy,
    check_pure_strategy,
)

logger = logging.getLogger(__name__)

DefenderStrategy = Union[PureStrategy, MixedStrategy]
AttackerStrategy = Union[PureStrategy, MixedStrategy, MarginalVector, Sequence[MarginalVector]]


def check_weights(inst: GameInstance, weights) -> np.ndarray:
    """Validate a per-voter weight vector and return it as a float array"""
    w = np.asarray(weights, dtype=float)
    if w.shape != (inst.num_voters,):
        raise StructureError(
            f"expected {inst.num_voters} voter weights, got shape {tuple(w.shape)}"
        )
    if np.any(w < 0.0) or np.any(w > 1.0):
        raise DomainError("voter weights must lie in [0, 1]")
    return w


def _selected_edges(inst: GameInstance, strategy: PureStrategy) -> np.ndarray:
    if not strategy.channels:
        return np.zeros(inst.num_edges, dtype=bool)
    return np.isin(inst.channels, strategy.as_array())


def _pure_survival(inst: GameInstance, strategy: PureStrategy) -> np.ndarray:
    survival = np.ones(inst.num_voters)
    mask = _selected_edges(inst, strategy)
    np.multiply.at(survival, inst.voters[mask], 1.0 - inst.q[mask])
    return survival


def survival_profile(inst: GameInstance, defender: DefenderStrategy) -> np.ndarray:
    """Expected probability, per voter, that no defended edge immunizes it"""
    if isinstance(defender, PureStrategy):
        check_pure_strategy(inst, defender, "defender", enforce_budget=False)
        return _pure_survival(inst, defender)
    profile = np.zeros(inst.num_voters)
    for strategy, weight in defender.items():
        check_pure_strategy(inst, strategy, "defender", enforce_budget=False)
        profile += weight * _pure_survival(inst, strategy)
    return profile


def _pure_reach(inst: GameInstance, w: np.ndarray, strategy: PureStrategy) -> np.ndarray:
    failure = np.ones(inst.num_voters)
    mask = _selected_edges(inst, strategy)
    np.multiply.at(failure, inst.voters[mask], 1.0 - inst.p[mask])
    reach = w * (1.0 - failure)
    if inst.is_extended:
        activated = strategy.as_array()
        activated = activated[activated >= inst.num_real_channels] - inst.num_real_channels
        reach[activated] = 1.0
    return reach


def as_marginal(inst: GameInstance, x) -> MarginalVector:
    """Coerce an array or MarginalVector to a marginal vector for this instance"""
    if isinstance(x, MarginalVector):
        marginal = x
    else:
        marginal = MarginalVector(
            np.asarray(x, dtype=float),
            budget=float(inst.attacker_budget),
            flip_budget=float(inst.flip_budget),
            num_pseudo=inst.num_pseudo_channels,
        )
    if marginal.dimension != inst.num_channels:
        raise DomainError(
            f"marginal vector has {marginal.dimension} entries, instance has "
            f"{inst.num_channels} channels"
        )
    return marginal


def _edge_factors(inst: GameInstance, x: np.ndarray) -> np.ndarray:
    return 1.0 - x[inst.channels] * inst.p


def _marginal_reach(inst: GameInstance, w: np.ndarray, marginal: MarginalVector) -> np.ndarray:
    x = marginal.values
    failure = np.ones(inst.num_voters)
    np.multiply.at(failure, inst.voters, _edge_factors(inst, x))
    reach = w * (1.0 - failure)
    if inst.is_extended:
        reach += (1.0 - w) * x[inst.num_real_channels :]
    return reach


def reach_profile(inst: GameInstance, weights, attacker: AttackerStrategy) -> np.ndarray:
    """Expected weighted reach per voter.

    For a pure set S_a this is w_v * (1 - prod_{u in S_a}(1 - p_uv)), or 1 for a
    voter whose pseudo-channel is attacked. Marginal vectors are evaluated under
    independent inclusion; a sequence of marginal vectors is their uniform
    mixture.
    """
    w = check_weights(inst, weights)
    if isinstance(attacker, PureStrategy):
        check_pure_strategy(inst, attacker, "attacker", enforce_budget=False)
        return _pure_reach(inst, w, attacker)
    if isinstance(attacker, MixedStrategy):
        profile = np.zeros(inst.num_voters)
        for strategy, weight in attacker.items():
            check_pure_strategy(inst, strategy, "attacker", enforce_budget=False)
            profile += weight * _pure_reach(inst, w, strategy)
        return profile
    if isinstance(attacker, MarginalVector):
        return _marginal_reach(inst, w, as_marginal(inst, attacker))
    marginals = list(attacker)
    if not marginals:
        raise DomainError("empty sequence of marginal vectors")
    profile = np.zeros(inst.num_voters)
    for marginal in marginals:
        profile += _marginal_reach(inst, w, as_marginal(inst, marginal))
    return profile / len(marginals)


def payoff(
    inst: GameInstance, theta, defender: PureStrategy, attacker: PureStrategy
) -> float:
    """Expected number of switched voters for a pair of pure strategies"""
    reach = reach_profile(inst, theta, attacker)
    return float(np.dot(survival_profile(inst, defender), reach))


def expected_payoff(
    inst: GameInstance, theta, defender: DefenderStrategy, attacker: AttackerStrategy
) -> float:
    """Expected payoff when both players randomize independently"""
    return float(np.dot(survival_profile(inst, defender), reach_profile(inst, theta, attacker)))


def payoff_vs_mixed(
    inst: GameInstance,
    theta,
    sigma: MixedStrategy,
    other: PureStrategy,
    side: str = "defender",
) -> float:
    """Payoff of a mixture against a pure strategy.

    Args:
        inst: Game instance
        theta: Voter weights
        sigma: Mixed strategy of the player named by ``side``
        other: Pure strategy of the opponent
        side: "defender" if sigma mixes defenses, "attacker" if it mixes attacks

    Returns:
        Weight-averaged payoff over sigma's support
    """
    if side == "defender":
        return expected_payoff(inst, theta, sigma, other)
    if side == "attacker":
        return expected_payoff(inst, theta, other, sigma)
    raise ValueError(f"Unknown side: {side}")


def disjoint_decompose(inst: GameInstance, theta) -> Tuple[np.ndarray, np.ndarray]:
    """Per-channel linear rewards for disjoint populations.

    Returns (a, b) with a_u = sum_v w_v p_uv and b_u = sum_v w_v p_uv q_uv, so
    that f(S_d, S_a) = sum_{u in S_a} a_u - sum_{u in S_a and S_d} b_u.
    """
    if not inst.is_disjoint:
        raise StructureError("disjoint decomposition requires every voter to have one edge")
    w = check_weights(inst, theta)
    reach = w[inst.voters] * inst.p
    a = np.bincount(inst.channels, weights=reach, minlength=inst.num_channels)
    b = np.bincount(inst.channels, weights=reach * inst.q, minlength=inst.num_channels)
    return a, b


def multilinear_extension(inst: GameInstance, theta, x, defender: PureStrategy) -> float:
    """F(x | S_d): expected payoff when channel u is attacked independently w.p. x_u"""
    marginal = as_marginal(inst, x)
    reach = reach_profile(inst, theta, marginal)
    return float(np.dot(survival_profile(inst, defender), reach))


def exclusion_products(inst: GameInstance, factors: np.ndarray) -> np.ndarray:
    """Per edge, the product of the other factors at the same voter.

    Divides the cached per-voter product by the edge's own factor; a voter with a
    zero factor falls back to the cached product of its nonzero factors.
    """
    n = inst.num_voters
    full = np.ones(n)
    np.multiply.at(full, inst.voters, factors)
    is_zero = factors == 0.0
    nonzero = np.ones(n)
    np.multiply.at(nonzero, inst.voters, np.where(is_zero, 1.0, factors))
    zero_count = np.bincount(inst.voters, weights=is_zero.astype(float), minlength=n)

    own = np.where(is_zero, 1.0, factors)
    divided = full[inst.voters] / own
    saturated = np.where(zero_count[inst.voters] == 1.0, nonzero[inst.voters], 0.0)
    return np.where(is_zero, saturated, divided)


def multilinear_gradient(inst: GameInstance, theta, x, defender: PureStrategy) -> np.ndarray:
    """Gradient of F(x | S_d) with respect to x, in O(edges) time"""
    w = check_weights(inst, theta)
    marginal = as_marginal(inst, x)
    survival = survival_profile(inst, defender)
    factors = _edge_factors(inst, marginal.values)
    excluded = exclusion_products(inst, factors)

    voter_w = w[inst.voters]
    per_edge = voter_w * inst.p * excluded
    if inst.is_extended:
        per_edge = per_edge + inst.activation_edges() * (1.0 - voter_w)
    per_edge = survival[inst.voters] * per_edge
    return np.bincount(inst.channels, weights=per_edge, minlength=inst.num_channels)


def blocked_influence(
    inst: GameInstance, theta, defender: PureStrategy, attacker: AttackerStrategy
) -> float:
    """g(S_d) = E[f(empty, S_a)] - E[f(S_d, S_a)], switches averted by a defense"""
    if isinstance(attacker, np.ndarray):
        reach = attacker
    else:
        reach = reach_profile(inst, theta, attacker)
    survival = survival_profile(inst, defender)
    return float(np.dot(1.0 - survival, reach))
