#!/usr/bin/env python3
"""
Test script for the equilibrium solvers

Covers the greedy defender response, the FTPL solvers for disjoint
populations, the online gradient solvers and the solver factory.
"""

import json
import math
import os
import sys

import numpy as np
import pytest
from scipy.optimize import linprog

# Add the project root to the path so we can import the packages
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from experiments.config import GeneratorConfig  # noqa: E402
from experiments.generator import generate_instance  # noqa: E402
from games.errors import ConfigError, DomainError, StructureError  # noqa: E402
from games.game_model import (  # noqa: E402
    AdversarialPreferences,
    GameInstance,
    KnownPreferences,
    MarginalPreferences,
    MixedStrategy,
    PureStrategy,
    SampledPreferences,
)
from games.oracles import (  # noqa: E402
    exact_attacker_best_response,
    exact_defender_best_response,
    matrix_game_value,
    payoff_matrix,
)
from games.payoffs import (  # noqa: E402
    blocked_influence,
    payoff,
    reach_profile,
    survival_profile,
)
from games.projections import CappedSimplex  # noqa: E402
from games.uncertainty import adversarial_extend  # noqa: E402
from solvers import SolverFactory  # noqa: E402
from solvers.ftpl import (  # noqa: E402
    FtplAdversarialSolver,
    FtplConfig,
    FtplSolver,
    ftpl_adversarial,
    ftpl_asymmetric,
    ftpl_solve,
    iterations_for_epsilon,
)
from solvers.greedy import greedy_best_response  # noqa: E402
from solvers.online_gradient import (  # noqa: E402
    EXPERIMENT_ITERATIONS,
    EXPERIMENT_STEP_SIZE,
    Initialization,
    MirrorConfig,
    OnlineGradientSolver,
    RegretConstants,
    UpdateRule,
    bicriteria_bound,
    iterations_for_mirror,
    og_adversarial,
    og_asymmetric,
    online_gradient_solve,
    regret_constants,
    sample_count_asymmetric,
    theoretical_budget_expansion,
)


def matching_pennies() -> GameInstance:
    return GameInstance.from_edges(2, 2, [(0, 0, 1.0, 1.0), (1, 1, 1.0, 1.0)], 1, 1)


def nondisjoint_game(seed: int, num_channels: int = 6, num_voters: int = 20, budget: int = 2):
    cfg = GeneratorConfig(
        num_channels=num_channels,
        num_voters=num_voters,
        max_degree=3,
        p_range=(0.0, 0.6),
        q_range=(0.0, 0.6),
        attacker_budget=budget,
        defender_budget=budget,
    )
    return generate_instance(cfg, seed)


def disjoint_game(seed: int, num_channels: int = 4, num_voters: int = 8, budget: int = 1):
    cfg = GeneratorConfig(
        num_channels=num_channels,
        num_voters=num_voters,
        p_range=(0.2, 1.0),
        q_range=(0.2, 1.0),
        disjoint=True,
        attacker_budget=budget,
        defender_budget=budget,
    )
    return generate_instance(cfg, seed)


def bernoulli_samples(seed: int, num_voters: int, count: int = 20):
    draws = np.random.default_rng(seed).random((count, num_voters)) < 0.5
    return [row.astype(float) for row in draws]


def asymmetric_value(inst: GameInstance, samples) -> float:
    """min over defender mixtures of the mean per-sample attacker best response"""
    matrices = [payoff_matrix(inst, w)[0] for w in samples]
    rows, count = matrices[0].shape[0], len(matrices)
    # variables: defender mixture x, then one best-response level z_j per sample
    cost = np.concatenate([np.zeros(rows), np.full(count, 1.0 / count)])
    blocks = []
    for j, matrix in enumerate(matrices):
        block = np.zeros((matrix.shape[1], rows + count))
        block[:, :rows] = matrix.T
        block[:, rows + j] = -1.0
        blocks.append(block)
    constraints = np.vstack(blocks)
    result = linprog(
        cost,
        A_ub=constraints,
        b_ub=np.zeros(constraints.shape[0]),
        A_eq=np.concatenate([np.ones(rows), np.zeros(count)])[None, :],
        b_eq=[1.0],
        bounds=[(0.0, None)] * rows + [(None, None)] * count,
        method="highs",
    )
    assert result.status == 0
    return float(result.fun)


# ---------------------------------------------------------------------------
# Greedy
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_lazy_and_naive_greedy_agree(seed):
    inst, prefs = nondisjoint_game(seed, num_channels=10, num_voters=40)
    rng = np.random.default_rng(seed)
    reach = rng.uniform(0.0, 1.0, inst.num_voters) * prefs.theta
    for budget in (1, 3, 6):
        lazy = greedy_best_response(inst, None, reach, budget, lazy=True)
        naive = greedy_best_response(inst, None, reach, budget, lazy=False)
        assert lazy == naive


@pytest.mark.parametrize("seed", range(5))
def test_greedy_approximation_guarantee(seed):
    """g(greedy with l channels) >= (1 - exp(-l / k_d)) g(best k_d-set)"""
    inst, _ = nondisjoint_game(seed, num_channels=8, num_voters=25)
    reach = np.random.default_rng(seed).uniform(0.0, 1.0, inst.num_voters)
    _, best_value = exact_defender_best_response(inst, None, reach)
    optimum = float(reach.sum()) - best_value
    for budget in (2, 4, 6):
        chosen = greedy_best_response(inst, None, reach, budget)
        achieved = blocked_influence(inst, None, chosen, reach)
        assert achieved >= (1.0 - math.exp(-budget / 2)) * optimum - 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_expanded_greedy_is_near_optimal(seed):
    inst, prefs = nondisjoint_game(seed, num_channels=8, num_voters=25)
    epsilon = 0.1
    sigma_a = MixedStrategy.point(PureStrategy((0, 5)))
    reach = reach_profile(inst, prefs.theta, sigma_a)
    budget = math.ceil(theoretical_budget_expansion(inst.num_voters, epsilon) * 2)
    chosen = greedy_best_response(inst, prefs.theta, sigma_a, budget)
    value = float(np.dot(survival_profile(inst, chosen), reach))
    _, best = exact_defender_best_response(inst, prefs.theta, sigma_a)
    assert value <= best + epsilon


def test_greedy_edge_cases():
    inst, _ = nondisjoint_game(0)
    with pytest.raises(DomainError):
        greedy_best_response(inst, None, np.ones(inst.num_voters), 0)
    assert greedy_best_response(inst, None, np.zeros(inst.num_voters), 3) == PureStrategy()
    full = greedy_best_response(inst, None, np.ones(inst.num_voters), 100)
    assert len(full) <= inst.num_channels


# ---------------------------------------------------------------------------
# FTPL
# ---------------------------------------------------------------------------


def test_iterations_for_epsilon():
    assert iterations_for_epsilon(10, 2, 1, 1.0) == 800
    assert iterations_for_epsilon(10, 2, 1, 1.0, flip_budget=3, variant="adversarial") == 2000
    with pytest.raises(DomainError):
        iterations_for_epsilon(10, 2, 1, 0.0)


def test_ftpl_config_validation():
    with pytest.raises(DomainError):
        FtplConfig(epsilon=0.0).validate()
    with pytest.raises(DomainError):
        FtplConfig(perturbation_scale=-1.0).validate()
    assert FtplConfig(epsilon=0.25).scale == 4.0
    with pytest.raises(ConfigError):
        FtplConfig.from_dict({"epsilon": 0.1, "rounds": 10})


def test_ftpl_requires_disjoint_instance():
    inst = GameInstance.from_edges(2, 1, [(0, 0, 0.5, 0.5), (1, 0, 0.5, 0.5)], 1, 1)
    with pytest.raises(StructureError):
        FtplSolver(inst, np.ones(1), FtplConfig())


def test_ftpl_is_deterministic_per_seed():
    inst, prefs = disjoint_game(0)
    cfg = FtplConfig(iterations=200, seed=11)
    first = ftpl_solve(inst, prefs.theta, cfg)
    second = ftpl_solve(inst, prefs.theta, cfg)
    assert first.defender_history == second.defender_history
    assert first.attacker_history == second.attacker_history
    assert len(first) == 200


def test_single_sample_asymmetric_is_plain_ftpl():
    inst, prefs = disjoint_game(1)
    cfg = FtplConfig(iterations=150, seed=4)
    plain = ftpl_solve(inst, prefs.theta, cfg)
    asymmetric = ftpl_asymmetric(inst, [prefs.theta], cfg)
    assert asymmetric.defender.defender_history == plain.defender_history
    assert asymmetric.attackers[0].attacker_history == plain.attacker_history


def test_zero_flip_adversarial_is_plain_ftpl():
    inst, prefs = disjoint_game(2)
    cfg = FtplConfig(iterations=150, seed=9)
    plain = ftpl_solve(inst, prefs.theta, cfg)
    adversarial = ftpl_adversarial(inst, prefs.theta, 0, cfg)
    assert adversarial.defender_history == plain.defender_history
    assert adversarial.attacker_history == plain.attacker_history


def test_adversarial_ftpl_respects_partition_budgets():
    inst, prefs = disjoint_game(3)
    trace = ftpl_adversarial(inst, prefs.theta, 2, FtplConfig(iterations=100, seed=1))
    for play in trace.attacker_history:
        real = [u for u in play if u < inst.num_channels]
        pseudo = [u for u in play if u >= inst.num_channels]
        assert len(real) == inst.attacker_budget
        assert len(pseudo) == 2


def test_ftpl_matching_pennies_certificate():
    cfg = FtplConfig(epsilon=0.1, seed=0, certify=True)
    report = FtplSolver(matching_pennies(), np.ones(2), cfg).solve()
    assert report.iterations == 1600
    assert report.certificate is not None
    assert report.certificate.upper <= 0.6
    assert report.certificate.lower >= 0.4


@pytest.mark.parametrize("seed", range(2))
def test_ftpl_reaches_epsilon_equilibrium(seed):
    inst, prefs = disjoint_game(seed)
    epsilon = 0.5
    cfg = FtplConfig(epsilon=epsilon, seed=seed, certify=True)
    report = FtplSolver(inst, prefs.theta, cfg).solve()
    value = matrix_game_value(inst, prefs.theta, method="lp").value
    assert report.certificate.upper <= value + epsilon
    assert report.certificate.lower >= value - epsilon
    assert abs(report.empirical_value - value) <= epsilon


@pytest.mark.slow
def test_ftpl_equilibrium_at_desk_scale():
    inst, prefs = disjoint_game(0, num_channels=6, num_voters=30, budget=2)
    epsilon = 0.5
    report = FtplSolver(inst, prefs.theta, FtplConfig(epsilon=epsilon, certify=True)).solve()
    assert report.iterations == 28800
    value = matrix_game_value(inst, prefs.theta, method="lp").value
    assert abs(report.empirical_value - value) <= epsilon
    assert report.certificate.upper - report.empirical_value <= epsilon
    assert report.empirical_value - report.certificate.lower <= epsilon


@pytest.mark.parametrize("seed", range(3))
def test_ftpl_regret_within_bound(seed):
    """Each player's realized reward is within n sqrt(k T) of its best fixed set"""
    inst, prefs = disjoint_game(seed, num_voters=10)
    trace = ftpl_solve(inst, prefs.theta, FtplConfig(epsilon=0.5, seed=seed))
    rounds = len(trace)
    n, k_a, k_d = inst.num_voters, inst.attacker_budget, inst.defender_budget

    best_defense = np.sort(trace.defender_rewards)[-k_d:].sum()
    assert best_defense - sum(trace.defender_realized) <= n * math.sqrt(k_d * rounds)
    best_attack = np.sort(trace.attacker_rewards)[-k_a:].sum()
    assert best_attack - sum(trace.payoffs) <= n * math.sqrt(k_a * rounds)


def flip_sensitive_game() -> GameInstance:
    """Channel 0 immunizes four weakly reached voters; channels 1 and 2 one voter each"""
    edges = [(0, v, 0.1, 1.0) for v in range(4)] + [(1, 4, 0.9, 0.1), (2, 5, 0.9, 0.1)]
    return GameInstance.from_edges(3, 6, edges, 1, 1)


def test_adversarial_ftpl_counts_flips_of_any_voter():
    """A flipped voter is reached for sure even when its nominal bit is already 1"""
    inst = flip_sensitive_game()
    theta_hat = np.ones(6)
    extended = adversarial_extend(inst, theta_hat, 2).instance
    oracle = matrix_game_value(extended, theta_hat, method="lp")
    assert oracle.value == pytest.approx(2.0, abs=1e-6)

    cfg = FtplConfig(epsilon=0.5, iterations=4000, certify=True)
    report = FtplAdversarialSolver(inst, theta_hat, 2, cfg).solve()
    assert report.certificate.upper <= oracle.value + 0.5
    assert report.certificate.lower >= oracle.value - 0.5
    assert abs(report.empirical_value - oracle.value) <= 0.5


@pytest.mark.parametrize("seed", range(2))
def test_adversarial_ftpl_matches_extended_game(seed):
    inst, prefs = disjoint_game(seed)
    epsilon = 0.5
    cfg = FtplConfig(epsilon=epsilon, seed=seed, certify=True)
    report = FtplAdversarialSolver(inst, prefs.theta, 1, cfg).solve()
    extension = adversarial_extend(inst, prefs.theta, 1)
    value = matrix_game_value(extension.instance, extension.weights, method="lp").value
    assert report.certificate.upper <= value + epsilon
    assert report.certificate.lower >= value - epsilon


def test_adversarial_ftpl_rewards_match_extended_payoff():
    """Realized rewards agree with the payoff of the extended instance"""
    inst, prefs = disjoint_game(4)
    trace = ftpl_adversarial(inst, prefs.theta, 2, FtplConfig(iterations=60, seed=2))
    extension = adversarial_extend(inst, prefs.theta, 2)
    for defense, attack, value, realized in zip(
        trace.defender_history, trace.attacker_history, trace.payoffs, trace.defender_realized
    ):
        exposed = payoff(extension.instance, extension.weights, PureStrategy(), attack)
        assert value == pytest.approx(
            payoff(extension.instance, extension.weights, defense, attack), abs=1e-12
        )
        assert realized == pytest.approx(exposed - value, abs=1e-12)


def test_ftpl_report_history():
    inst, prefs = disjoint_game(0)
    report = FtplSolver(inst, prefs.theta, FtplConfig(iterations=20)).solve()
    assert report.solver == "ftpl"
    assert len(report.history) == 20
    header = report.history_csv().splitlines()[0]
    assert header == "iteration,payoff,defender_reward,defense"
    json.dumps(report.to_dict())


# ---------------------------------------------------------------------------
# Online gradient
# ---------------------------------------------------------------------------


def test_regret_constants():
    edges = [(0, 0, 0.5, 0.4), (0, 1, 0.3, 0.2), (1, 1, 0.6, 0.5)]
    inst = GameInstance.from_edges(2, 2, edges, 1, 1)
    euclidean = regret_constants(inst, np.ones(2), UpdateRule.EUCLIDEAN, 1)
    assert euclidean.max_single_payoff == pytest.approx(0.8)
    assert euclidean.lipschitz == pytest.approx(0.8 * math.sqrt(2))
    assert euclidean.diameter == pytest.approx(1.0)
    entropic = regret_constants(inst, np.ones(2), UpdateRule.EXPONENTIATED, 1)
    assert entropic.lipschitz == pytest.approx(0.8)
    assert entropic.diameter == pytest.approx(math.log(2))


def test_iteration_schedule_meets_regret_target():
    constants = RegretConstants(lipschitz=1.3, diameter=2.0, max_single_payoff=1.3)
    for epsilon in (0.5, 0.2, 0.1):
        rounds = iterations_for_mirror(constants, epsilon)
        assert constants.regret_term(rounds) <= epsilon / 4 + 1e-12
        assert constants.regret_term(rounds - 1) > epsilon / 4 - 1e-12
    assert constants.step_size(8) == pytest.approx(1.0 / (1.3 * 4.0))


def test_bounds_and_sample_counts():
    constants = RegretConstants(1.0, 1.0, 1.0)
    assert bicriteria_bound(1.0, 0.1, constants, 2) == pytest.approx(4.2)
    assert bicriteria_bound(1.0, 0.1, constants, 2, adversarial=True) == pytest.approx(
        2.2 + 1.0 / math.sqrt(2.0)
    )
    assert theoretical_budget_expansion(500, 0.1) == pytest.approx(math.log(5000))
    assert theoretical_budget_expansion(2, 1.0) == 1.0
    assert sample_count_asymmetric(2, 2, 1, 1.0, math.exp(-1.0)) == 6
    with pytest.raises(DomainError):
        sample_count_asymmetric(2, 2, 1, 1.0, 1.0)


def test_mirror_config():
    cfg = MirrorConfig.from_dict({"update_rule": "euclidean", "initialization": "uniform"})
    assert cfg.update_rule is UpdateRule.EUCLIDEAN
    assert cfg.initialization is Initialization.UNIFORM
    assert MirrorConfig(budget_expansion=1.5).defender_budget(3) == 5
    assert MirrorConfig(budget_expansion=2.0).defender_budget(3) == 6
    with pytest.raises(ConfigError):
        MirrorConfig.from_dict({"update_rule": "newton"})
    with pytest.raises(ConfigError):
        MirrorConfig.from_dict({"learning_rate": 0.1})
    with pytest.raises(DomainError):
        MirrorConfig(budget_expansion=0.5).validate()


def test_step_size_rules():
    inst, prefs = nondisjoint_game(0)
    assert OnlineGradientSolver(inst, prefs.theta, MirrorConfig()).step_size() == (
        EXPERIMENT_STEP_SIZE
    )
    explicit = MirrorConfig(iterations=80, step_size=0.3)
    assert OnlineGradientSolver(inst, prefs.theta, explicit).step_size() == 0.3
    derived = OnlineGradientSolver(inst, prefs.theta, MirrorConfig(iterations=80))
    assert derived.step_size() == pytest.approx(derived.constants.step_size(80))


def test_initial_marginals():
    inst, prefs = nondisjoint_game(0, num_channels=5)
    scaled = OnlineGradientSolver(inst, prefs.theta, MirrorConfig()).initial_marginals()
    np.testing.assert_allclose(scaled, np.full(5, 0.1))
    uniform = MirrorConfig(initialization="uniform")
    np.testing.assert_allclose(
        OnlineGradientSolver(inst, prefs.theta, uniform).initial_marginals(), np.full(5, 0.4)
    )


@pytest.mark.parametrize(
    "settings",
    [
        {"update_rule": "exponentiated"},
        {"update_rule": "exponentiated", "entropic_mode": "exact"},
        {"update_rule": "euclidean", "initialization": "uniform"},
        {"update_rule": "euclidean", "lazy_greedy": False},
    ],
)
def test_online_gradient_run(settings):
    inst, prefs = nondisjoint_game(4)
    cfg = MirrorConfig(iterations=25, **settings)
    report = online_gradient_solve(inst, prefs.theta, cfg)
    assert report.solver == "online-gradient"
    assert len(report.history) == 25
    assert len(report.marginal_trace) == 25
    region = CappedSimplex(inst.num_channels, inst.attacker_budget)
    for x in report.marginal_trace:
        assert region.contains(x)
    for strategy in report.defender.support:
        assert len(strategy) <= inst.defender_budget
    assert set(report.history[0]) == {"iteration", "value", "blocked", "defense"}
    assert report.regret_term > 0
    json.dumps(report.to_dict())


def test_budget_expansion_limits_defense_size():
    inst, prefs = nondisjoint_game(5, num_channels=10)
    cfg = MirrorConfig(iterations=10, budget_expansion=2.0)
    report = online_gradient_solve(inst, prefs.theta, cfg)
    assert max(len(s) for s in report.defender.support) <= 4


def test_online_gradient_matching_pennies():
    cfg = MirrorConfig(iterations=200, certify=True)
    report = online_gradient_solve(matching_pennies(), np.ones(2), cfg)
    assert report.parameters["step_size"] == pytest.approx(0.05)
    assert report.certificate is not None
    assert report.certificate.upper <= 0.6


def test_single_sample_asymmetric_is_plain_online_gradient():
    inst, prefs = nondisjoint_game(6)
    cfg = MirrorConfig(iterations=20)
    plain = online_gradient_solve(inst, prefs.theta, cfg)
    asymmetric = og_asymmetric(inst, [prefs.theta], cfg)
    assert asymmetric.defender.support == plain.defender.support
    np.testing.assert_array_equal(asymmetric.defender.weights, plain.defender.weights)


def test_zero_flip_adversarial_is_plain_online_gradient():
    inst, prefs = nondisjoint_game(7)
    cfg = MirrorConfig(iterations=30, step_size=0.08)
    plain = online_gradient_solve(inst, prefs.theta, cfg)
    adversarial = og_adversarial(inst, prefs.theta, 0, cfg)
    assert adversarial.solver == "og-adversarial"
    assert adversarial.defender.support == plain.defender.support
    np.testing.assert_array_equal(adversarial.defender.weights, plain.defender.weights)


def test_adversarial_marginals_respect_flip_budget():
    inst, prefs = nondisjoint_game(8)
    report = og_adversarial(inst, prefs.theta, 3, MirrorConfig(iterations=15))
    m = inst.num_channels
    for x in report.marginal_trace:
        assert x[:m].sum() <= inst.attacker_budget + 1e-9
        assert x[m:].sum() <= 3 + 1e-9


def test_asymmetric_online_gradient():
    inst, _ = nondisjoint_game(9)
    samples = list(np.random.default_rng(0).random((4, inst.num_voters)) < 0.5)
    report = og_asymmetric(inst, [s.astype(float) for s in samples], MirrorConfig(iterations=15))
    assert report.solver == "og-asymmetric"
    assert len(report.history) == 15


def test_og_asymmetric_objective_near_value():
    inst, _ = nondisjoint_game(10, num_channels=5, num_voters=12)
    samples = bernoulli_samples(10, inst.num_voters)
    report = og_asymmetric(inst, samples, MirrorConfig(iterations=100, certify=True))
    # the certificate's upper end is the exhaustive per-sample best response, averaged
    objective = report.certificate.upper
    assert objective == pytest.approx(
        np.mean([exact_attacker_best_response(inst, w, report.defender)[1] for w in samples])
    )
    assert objective <= 2.0 * asymmetric_value(inst, samples) + 0.2


def test_ftpl_asymmetric_objective_near_value():
    inst, _ = disjoint_game(5, num_voters=10)
    samples = bernoulli_samples(5, inst.num_voters)
    trace = ftpl_asymmetric(inst, samples, FtplConfig(epsilon=0.5, seed=5))
    defender = trace.defender_strategy
    objective = np.mean([exact_attacker_best_response(inst, w, defender)[1] for w in samples])
    assert objective <= 2.0 * asymmetric_value(inst, samples) + 0.2


@pytest.mark.parametrize("seed", range(3))
def test_online_gradient_bicriteria_bound(seed):
    inst, prefs = nondisjoint_game(seed, num_channels=10, num_voters=30, budget=1)
    epsilon = 0.1
    cfg = MirrorConfig(
        iterations=200,
        epsilon=epsilon,
        budget_expansion=theoretical_budget_expansion(inst.num_voters, epsilon),
    )
    solver = OnlineGradientSolver(inst, prefs.theta, cfg)
    report = solver.solve()
    tau = matrix_game_value(inst, prefs.theta, method="lp").value
    _, attained = exact_attacker_best_response(inst, prefs.theta, report.defender)
    assert attained <= bicriteria_bound(tau, epsilon, solver.constants, report.iterations)


@pytest.mark.parametrize("seed", range(2))
def test_adversarial_online_gradient_bicriteria_bound(seed):
    inst, prefs = nondisjoint_game(seed, num_channels=5, num_voters=8, budget=1)
    epsilon = 0.1
    extension = adversarial_extend(inst, prefs.theta, 2)
    cfg = MirrorConfig(
        iterations=200,
        epsilon=epsilon,
        budget_expansion=theoretical_budget_expansion(inst.num_voters, epsilon),
    )
    solver = OnlineGradientSolver(extension.instance, extension.weights, cfg)
    report = solver.solve()
    tau = matrix_game_value(extension.instance, extension.weights, method="lp").value
    _, attained = exact_attacker_best_response(
        extension.instance, extension.weights, report.defender
    )
    bound = bicriteria_bound(tau, epsilon, solver.constants, report.iterations, adversarial=True)
    assert attained <= bound


@pytest.mark.parametrize("seed", range(10))
def test_adversarial_value_grows_with_flip_budget(seed):
    inst, prefs = nondisjoint_game(seed, num_channels=4, num_voters=8, budget=1)
    values = [
        matrix_game_value(
            adversarial_extend(inst, prefs.theta, flips).instance, prefs.theta, method="lp"
        ).value
        for flips in (0, 2, 4, 8)
    ]
    assert all(later >= earlier - 1e-6 for earlier, later in zip(values, values[1:]))


def test_mirror_iterations_follow_epsilon():
    inst, prefs = nondisjoint_game(0)
    solver = OnlineGradientSolver(inst, prefs.theta, MirrorConfig(iterations=0, epsilon=2.0))
    rounds = iterations_for_mirror(solver.constants, 2.0)
    assert solver.resolved_iterations() == rounds
    if rounds != EXPERIMENT_ITERATIONS:
        assert solver.step_size() == pytest.approx(solver.constants.step_size(rounds))
    tighter = OnlineGradientSolver(inst, prefs.theta, MirrorConfig(iterations=0, epsilon=1.0))
    assert tighter.resolved_iterations() >= rounds

    with pytest.raises(DomainError):
        MirrorConfig(iterations=-1).validate()
    with pytest.raises(ConfigError):
        MirrorConfig.from_dict({"seed": 1})


# ---------------------------------------------------------------------------
# Factory
# ---------------------------------------------------------------------------


def test_factory_selects_solver_by_structure_and_preferences():
    disjoint, prefs = disjoint_game(0)
    n = disjoint.num_voters
    samples = SampledPreferences(np.array([prefs.theta, np.ones(n)]))
    cases = [
        ("disjoint", disjoint, KnownPreferences(prefs.theta), "ftpl"),
        ("disjoint", disjoint, MarginalPreferences(np.full(n, 0.5)), "ftpl"),
        ("disjoint", disjoint, samples, "ftpl-asymmetric"),
        ("disjoint", disjoint, AdversarialPreferences(prefs.theta, 1), "ftpl-adversarial"),
        ("nondisjoint", disjoint, KnownPreferences(prefs.theta), "online-gradient"),
        ("nondisjoint", disjoint, samples, "og-asymmetric"),
        ("nondisjoint", disjoint, AdversarialPreferences(prefs.theta, 1), "og-adversarial"),
    ]
    for structure, inst, preferences, name in cases:
        solver = SolverFactory.create_solver(structure, inst, preferences)
        assert solver.get_solver_name() == name
        assert name in SolverFactory.get_available_solvers()
        assert solver.get_solver_description()


def test_factory_errors():
    inst, prefs = nondisjoint_game(0)
    with pytest.raises(StructureError):
        SolverFactory.create_solver("disjoint", inst, prefs)
    with pytest.raises(StructureError):
        SolverFactory.create_solver("bipartite", inst, prefs)
