"""
Greedy Defender Best Response

Greedy maximization of the blocked influence g(S_d), which is monotone
submodular in the defense set. The marginal gain of channel u given the current
defense is sum over u's voters of survival_v * q_uv * reach_v.
"""

import heapq
import logging
from typing import List, Tuple, Union

import numpy as np

from games.errors import DomainError
from games.game_model import GameInstance, PureStrategy
from games.payoffs import AttackerStrategy, reach_profile

logger = logging.getLogger(__name__)


def _marginal_gain(
    inst: GameInstance, channel: int, survival: np.ndarray, reach: np.ndarray
) -> float:
    edges = inst.channel_edges(channel)
    voters = inst.voters[edges]
    return float(np.dot(survival[voters] * inst.q[edges], reach[voters]))


def _defend(inst: GameInstance, channel: int, survival: np.ndarray) -> None:
    edges = inst.channel_edges(channel)
    survival[inst.voters[edges]] *= 1.0 - inst.q[edges]


def _naive_greedy(inst: GameInstance, reach: np.ndarray, budget: int) -> List[int]:
    survival = np.ones(inst.num_voters)
    chosen: List[int] = []
    remaining = list(range(inst.num_real_channels))
    for _ in range(budget):
        gains = [_marginal_gain(inst, u, survival, reach) for u in remaining]
        if not gains:
            break
        best = int(np.argmax(gains))
        if gains[best] <= 0.0:
            break
        channel = remaining.pop(best)
        chosen.append(channel)
        _defend(inst, channel, survival)
    return chosen


def _lazy_greedy(inst: GameInstance, reach: np.ndarray, budget: int) -> List[int]:
    survival = np.ones(inst.num_voters)
    heap: List[Tuple[float, int]] = [
        (-_marginal_gain(inst, u, survival, reach), u) for u in range(inst.num_real_channels)
    ]
    heapq.heapify(heap)
    chosen: List[int] = []
    while heap and len(chosen) < budget:
        _, channel = heapq.heappop(heap)
        entry = (-_marginal_gain(inst, channel, survival, reach), channel)
        if heap and entry > heap[0]:
            heapq.heappush(heap, entry)
            continue
        if -entry[0] <= 0.0:
            break
        chosen.append(channel)
        _defend(inst, channel, survival)
    return chosen


def greedy_best_response(
    inst: GameInstance,
    weights,
    attacker: Union[AttackerStrategy, np.ndarray],
    budget: int,
    lazy: bool = True,
) -> PureStrategy:
    """Greedy defense against an attacker mixture, marginal vector or reach profile.

    Args:
        inst: Game instance
        weights: Voter weights (ignored when ``attacker`` is a reach profile)
        attacker: Mixed strategy, marginal vector(s), or a precomputed per-voter
            reach profile such as a sample average
        budget: Number of channels the greedy may add
        lazy: Use priority-queue lazy evaluation of marginal gains

    Returns:
        Chosen channels; fewer than ``budget`` when no channel has positive gain
    """
    if budget < 1:
        raise DomainError(f"greedy budget must be at least 1, got {budget}")
    if isinstance(attacker, np.ndarray):
        reach = attacker
    else:
        reach = reach_profile(inst, weights, attacker)
    budget = min(budget, inst.num_real_channels)
    chosen = _lazy_greedy(inst, reach, budget) if lazy else _naive_greedy(inst, reach, budget)
    return PureStrategy(tuple(chosen))
