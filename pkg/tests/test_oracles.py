#!/usr/bin/env python3
"""
Test script for the exact oracles

Best responses are compared against brute force over the payoff matrix; the
gap certificate and the matrix-game solvers are checked on matching pennies.
"""

import itertools
import os
import sys

import numpy as np
import pytest

# Add the project root to the path so we can import the packages
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from experiments.config import GeneratorConfig  # noqa: E402
from experiments.generator import generate_instance  # noqa: E402
from games.errors import DomainError, ResourceError  # noqa: E402
from games.game_model import GameInstance, MixedStrategy, PureStrategy  # noqa: E402
from games.oracles import (  # noqa: E402
    check_submodular_monotone,
    exact_attacker_best_response,
    exact_defender_best_response,
    finite_difference_gradient,
    matrix_game_value,
    optimality_gap,
    payoff_matrix,
)
from games.payoffs import expected_payoff  # noqa: E402
from games.uncertainty import adversarial_extend  # noqa: E402


def matching_pennies() -> GameInstance:
    return GameInstance.from_edges(2, 2, [(0, 0, 1.0, 1.0), (1, 1, 1.0, 1.0)], 1, 1)


def half_and_half() -> MixedStrategy:
    return MixedStrategy((PureStrategy((0,)), PureStrategy((1,))), np.array([0.5, 0.5]))


def small_game(seed: int, **budgets):
    cfg = GeneratorConfig(
        num_channels=6,
        num_voters=12,
        max_degree=3,
        p_range=(0.0, 0.8),
        q_range=(0.0, 0.8),
        attacker_budget=budgets.get("attacker", 2),
        defender_budget=budgets.get("defender", 2),
    )
    return generate_instance(cfg, seed)


def random_mixture(sets, rng, size=3) -> MixedStrategy:
    picks = rng.choice(len(sets), size, replace=False)
    return MixedStrategy(tuple(sets[i] for i in picks), rng.dirichlet(np.ones(size)))


@pytest.mark.parametrize("seed", range(4))
def test_attacker_best_response_is_brute_force_max(seed):
    inst, prefs = small_game(seed)
    rng = np.random.default_rng(seed)
    defenses = [PureStrategy(s) for s in itertools.combinations(range(6), 2)]
    sigma_d = random_mixture(defenses, rng)

    response, value = exact_attacker_best_response(inst, prefs.theta, sigma_d)
    attacks = [PureStrategy(s) for s in itertools.combinations(range(6), 2)]
    brute = max(expected_payoff(inst, prefs.theta, sigma_d, a) for a in attacks)
    assert value == pytest.approx(brute, rel=1e-12, abs=1e-12)
    assert expected_payoff(inst, prefs.theta, sigma_d, response) == pytest.approx(value)


@pytest.mark.parametrize("seed", range(4))
def test_defender_best_response_is_brute_force_min(seed):
    inst, prefs = small_game(seed)
    rng = np.random.default_rng(seed + 50)
    attacks = [PureStrategy(s) for s in itertools.combinations(range(6), 2)]
    sigma_a = random_mixture(attacks, rng)

    response, value = exact_defender_best_response(inst, prefs.theta, sigma_a)
    defenses = [PureStrategy(s) for s in itertools.combinations(range(6), 2)]
    brute = min(expected_payoff(inst, prefs.theta, d, sigma_a) for d in defenses)
    assert value == pytest.approx(brute, rel=1e-12, abs=1e-12)
    assert len(response) == 2


@pytest.mark.parametrize("seed", range(3))
def test_enumeration_order_does_not_change_result(seed):
    inst, prefs = small_game(seed)
    sigma_d = MixedStrategy.point(PureStrategy((0, 1)))
    forward = exact_attacker_best_response(inst, prefs.theta, sigma_d)
    backward = exact_attacker_best_response(inst, prefs.theta, sigma_d, reverse=True)
    assert forward[0] == backward[0]
    assert forward[1] == pytest.approx(backward[1], rel=1e-12)

    sigma_a = MixedStrategy.point(PureStrategy((2, 3)))
    forward = exact_defender_best_response(inst, prefs.theta, sigma_a)
    backward = exact_defender_best_response(inst, prefs.theta, sigma_a, reverse=True)
    assert forward[0] == backward[0]
    assert forward[1] == pytest.approx(backward[1], rel=1e-12)


def test_ties_go_to_lexicographically_smallest_set():
    edges = [(u, u, 0.5, 0.5) for u in range(3)]
    inst = GameInstance.from_edges(3, 3, edges, 1, 1)
    response, value = exact_attacker_best_response(
        inst, np.ones(3), MixedStrategy.point(PureStrategy())
    )
    assert response == PureStrategy((0,))
    assert value == pytest.approx(0.5)
    response, _ = exact_defender_best_response(inst, np.ones(3), MixedStrategy.point(response))
    assert response == PureStrategy((0,))


def test_gap_certificate_on_matching_pennies():
    inst = matching_pennies()
    certificate = optimality_gap(inst, np.ones(2), half_and_half(), half_and_half())
    assert certificate.upper == 0.5
    assert certificate.lower == 0.5
    assert certificate.gap == 0.0
    assert certificate.to_dict()["gap_defined"] is True


def test_gap_undefined_when_everything_is_immunized():
    edges = [(0, 0, 0.5, 1.0), (1, 1, 0.5, 1.0)]
    inst = GameInstance.from_edges(2, 2, edges, 1, 2)
    sigma_d = MixedStrategy.point(PureStrategy((0, 1)))
    certificate = optimality_gap(inst, np.ones(2), sigma_d, half_and_half())
    assert certificate.lower == 0.0
    assert certificate.gap is None
    assert not certificate.gap_defined


def test_enumeration_cap():
    inst, prefs = small_game(0)
    sigma_d = MixedStrategy.point(PureStrategy())
    with pytest.raises(ResourceError):
        exact_attacker_best_response(inst, prefs.theta, sigma_d, cap=10)
    with pytest.raises(ResourceError):
        payoff_matrix(inst, prefs.theta, cap=100)


def test_adversarial_best_response_matches_brute_force():
    inst, prefs = small_game(5, attacker=1, defender=1)
    inst = GameInstance.from_edges(
        inst.num_channels, 6, [e for e in inst.edge_list() if e[1] < 6], 1, 1
    )
    theta = prefs.theta[:6]
    extended = adversarial_extend(inst, theta, 2).instance
    sigma_d = MixedStrategy((PureStrategy((0,)), PureStrategy((3,))), np.array([0.4, 0.6]))

    response, value = exact_attacker_best_response(extended, theta, sigma_d)
    candidates = [
        PureStrategy((u,) + tuple(6 + v for v in flips))
        for u in range(6)
        for flips in itertools.combinations(range(6), 2)
    ]
    brute = max(expected_payoff(extended, theta, sigma_d, s) for s in candidates)
    assert value == pytest.approx(brute)
    assert expected_payoff(extended, theta, sigma_d, response) == pytest.approx(value)


@pytest.mark.parametrize("method", ["lp", "mwu"])
def test_matching_pennies_value(method):
    result = matrix_game_value(matching_pennies(), np.ones(2), method=method)
    assert result.converged
    assert result.value == pytest.approx(0.5, abs=1e-6)
    assert result.duality_gap <= 1e-6
    np.testing.assert_allclose(result.defender.weights, [0.5, 0.5], atol=1e-6)


def test_matrix_game_brackets_pure_bounds():
    inst, prefs = small_game(2)
    result = matrix_game_value(inst, prefs.theta, method="lp")
    matrix, _, _ = payoff_matrix(inst, prefs.theta)
    # max_j min_i <= value <= min_i max_j, rows being defender sets
    assert matrix.max(axis=1).min() + 1e-7 >= result.value
    assert matrix.min(axis=0).max() - 1e-7 <= result.value
    assert result.lower <= result.value <= result.upper


def test_submodularity_checker_flags_violations():
    assert check_submodular_monotone(lambda s: float(len(s)) ** 0.5, 4) == []
    supermodular = check_submodular_monotone(lambda s: float(len(s)) ** 2, 3)
    assert {v.kind for v in supermodular} == {"diminishing-returns"}
    decreasing = check_submodular_monotone(lambda s: -float(len(s)), 3)
    assert {v.kind for v in decreasing} == {"monotone"}
    with pytest.raises(DomainError):
        check_submodular_monotone(lambda s: 0.0, 13)


def test_finite_differences_need_interior_points():
    def quadratic(x):
        return float(np.sum(x**2))

    np.testing.assert_allclose(
        finite_difference_gradient(quadratic, np.array([0.2, 0.7])), [0.4, 1.4], rtol=1e-6
    )
    with pytest.raises(DomainError):
        finite_difference_gradient(quadratic, np.array([0.0, 0.5]))
