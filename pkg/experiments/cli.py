#!/usr/bin/env python3
"""
Election Defense CLI

Command-line interface for instance generation, single solver runs, gap
certificates and the experiment runners.

Usage:
    election-defense gen --num-channels 30 --num-voters 150 --seed 7 -o instance.json
    election-defense solve instance.json --structure nondisjoint -o report.json
    election-defense gap instance.json defender.json attacker.json
    election-defense table --config config/example_config.json
    election-defense sweep --config config/example_config.json --set experiment.replications=3
    election-defense uncertainty --config config/example_config.json
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np

from games.errors import ConfigError, DomainError, GameError, ResourceError
from games.game_model import (
    AdversarialPreferences,
    GameInstance,
    KnownPreferences,
    MarginalPreferences,
    PreferenceModel,
    SampledPreferences,
)
from games.oracles import optimality_gap
from games.serialization import (
    dumps,
    instance_to_dict,
    load_instance,
    load_strategy,
    save_instance,
    write_json,
)
from games.uncertainty import draw_preference_samples, preference_weights
from solvers.factory import SolverFactory
from solvers.ftpl import FtplConfig
from solvers.online_gradient import MirrorConfig

from .config import ExperimentConfig, GeneratorConfig
from .generator import generate_instance
from .runners import ResultTable, run_budget_sweep, run_gap_table, run_uncertainty_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RESOURCE = 3

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def configure_logging(verbose: bool, quiet: bool):
    """Send log records to standard error at the requested verbosity"""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def emit(text: str, output: Optional[str]):
    """Write a document to a file, or to standard output without a path"""
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info("Wrote %s", path)
    else:
        sys.stdout.write(text)


def parse_override(text: str) -> Dict[str, Dict[str, Any]]:
    """Parse SECTION.KEY=VALUE; VALUE is read as JSON, falling back to a string"""
    if "=" not in text or "." not in text.split("=", 1)[0]:
        raise ConfigError(f"override must look like section.key=value, got '{text}'")
    name, raw = text.split("=", 1)
    section, key = name.split(".", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return {section: {key: value}}


def load_experiment_config(args) -> ExperimentConfig:
    """Config file (or defaults) with --set overrides and the global seed applied"""
    if args.config:
        config = ExperimentConfig.from_json_file(args.config)
        data = config.to_dict()
    else:
        data = ExperimentConfig().to_dict()
    for override in args.set or []:
        for section, values in parse_override(override).items():
            data.setdefault(section, {}).update(values)
    if args.seed is not None:
        data["experiment"]["seed"] = args.seed
    return ExperimentConfig.from_dict(data)


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def command_gen(args) -> int:
    generator = GeneratorConfig(
        num_channels=args.num_channels,
        num_voters=args.num_voters,
        min_degree=args.min_degree,
        max_degree=args.max_degree,
        p_range=tuple(args.p_range),
        q_range=tuple(args.q_range),
        theta_recipe=args.theta_recipe,
        theta_probability=args.theta_probability,
        disjoint=args.disjoint,
        attacker_budget=args.attacker_budget,
        defender_budget=args.defender_budget,
    )
    seed = 0 if args.seed is None else args.seed
    instance, preferences = generate_instance(generator, seed)
    if args.output:
        save_instance(args.output, instance, preferences)
        logger.info("Wrote %s to %s", instance, args.output)
    else:
        sys.stdout.write(dumps(instance_to_dict(instance, preferences)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def preference_model(
    args, instance: GameInstance, stored: Optional[PreferenceModel], seed: int
) -> PreferenceModel:
    """The preference model a solve run uses, built from the file block and flags"""
    setting = args.preferences
    n = instance.num_voters
    if setting == "known":
        if args.marginal is not None or isinstance(stored, MarginalPreferences):
            raise ConfigError("known preferences need a 'known' block in the instance file")
        if stored is None:
            return KnownPreferences(np.ones(n))
        return KnownPreferences(preference_weights(instance, stored))
    if setting == "stochastic":
        if args.marginal is not None:
            return MarginalPreferences(np.full(n, args.marginal))
        if isinstance(stored, (MarginalPreferences, KnownPreferences)):
            return stored
        raise ConfigError("stochastic preferences need --marginal or a marginals block")
    if setting == "asymmetric":
        if isinstance(stored, SampledPreferences):
            return stored
        if args.marginal is not None:
            prior: PreferenceModel = MarginalPreferences(np.full(n, args.marginal))
        elif stored is not None:
            prior = stored
        else:
            raise ConfigError("asymmetric preferences need --marginal or a preference block")
        return draw_preference_samples(prior, args.num_samples, seed)
    if isinstance(stored, AdversarialPreferences) and args.flip_budget is None:
        return stored
    nominal = np.ones(n) if stored is None else preference_weights(instance, stored)
    if not np.all((nominal == 0.0) | (nominal == 1.0)):
        raise DomainError("adversarial preferences need a 0/1 nominal profile")
    return AdversarialPreferences(nominal, args.flip_budget or 0)


def command_solve(args) -> int:
    instance, stored = load_instance(args.instance)
    seed = 0 if args.seed is None else args.seed
    preferences = preference_model(args, instance, stored, seed)
    ftpl = FtplConfig(
        epsilon=args.epsilon,
        iterations=args.iterations or 0,
        perturbation_scale=args.perturbation_scale,
        seed=seed,
        certify=args.certify,
    )
    mirror = MirrorConfig(
        iterations=MirrorConfig.iterations if args.iterations is None else args.iterations,
        step_size=args.step_size,
        update_rule=args.update_rule,
        budget_expansion=args.budget_expansion,
        epsilon=args.epsilon,
        initialization=args.initialization,
        entropic_mode=args.entropic_mode,
        lazy_greedy=not args.eager_greedy,
        certify=args.certify,
    )
    solver = SolverFactory.create_solver(args.structure, instance, preferences, ftpl, mirror)
    logger.info("Solving with %s: %s", solver.get_solver_name(), solver.get_solver_description())
    report = solver.solve()
    emit(dumps(report.to_dict()), args.output)
    if args.history:
        emit(report.history_csv(), args.history)
    return EXIT_OK


# ---------------------------------------------------------------------------
# gap
# ---------------------------------------------------------------------------


def command_gap(args) -> int:
    instance, stored = load_instance(args.instance)
    if stored is None:
        weights = np.ones(instance.num_voters)
    else:
        weights = preference_weights(instance, stored)
    defender = load_strategy(args.defender)
    attacker = load_strategy(args.attacker)
    certificate = optimality_gap(instance, weights, defender, attacker, cap=args.cap)
    emit(dumps(certificate.to_dict()), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def finish_table(table: ResultTable, config: ExperimentConfig, output: Optional[str]) -> int:
    path = output or str(Path(config.output_dir) / f"{table.name}.csv")
    table.write(path)
    if table.flags:
        write_json(Path(path).with_suffix(".flags.json"), dict(table.flags))
        for key in sorted(table.flags):
            print(f"{key}: {table.flags[key]}")
    return EXIT_OK


def command_table(args) -> int:
    config = load_experiment_config(args)
    return finish_table(run_gap_table(config), config, args.output)


def command_sweep(args) -> int:
    config = load_experiment_config(args)
    return finish_table(run_budget_sweep(config), config, args.output)


def command_uncertainty(args) -> int:
    config = load_experiment_config(args)
    return finish_table(run_uncertainty_suite(config), config, args.output)


COMMANDS = {
    "gen": command_gen,
    "solve": command_solve,
    "gap": command_gap,
    "table": command_table,
    "sweep": command_sweep,
    "uncertainty": command_uncertainty,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="election-defense",
        description="Election Defense - minimax defender strategies against misinformation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("Usage:", 1)[1] if __doc__ else None,
    )
    # Options shared by every subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Seed (master seed for experiments)")
    common.add_argument("-o", "--output", help="Output file (default: standard output)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings only")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Gen command
    gen_parser = subparsers.add_parser(
        "gen",
        parents=[common],
        help="Generate a synthetic instance",
        description="Draw a random channel-voter instance with preference bits",
    )
    defaults = GeneratorConfig()
    gen_parser.add_argument("--num-channels", type=int, default=defaults.num_channels)
    gen_parser.add_argument("--num-voters", type=int, default=defaults.num_voters)
    gen_parser.add_argument("--min-degree", type=int, default=defaults.min_degree)
    gen_parser.add_argument("--max-degree", type=int, default=defaults.max_degree)
    gen_parser.add_argument(
        "--p-range", type=float, nargs=2, default=list(defaults.p_range), metavar=("LOW", "HIGH")
    )
    gen_parser.add_argument(
        "--q-range", type=float, nargs=2, default=list(defaults.q_range), metavar=("LOW", "HIGH")
    )
    gen_parser.add_argument("--theta-recipe", choices=["bernoulli", "ones"], default="bernoulli")
    gen_parser.add_argument("--theta-probability", type=float, default=defaults.theta_probability)
    gen_parser.add_argument(
        "--disjoint", action="store_true", help="One channel per voter (disjoint populations)"
    )
    gen_parser.add_argument("--attacker-budget", type=int, default=defaults.attacker_budget)
    gen_parser.add_argument("--defender-budget", type=int, default=defaults.defender_budget)

    # Solve command
    solve_parser = subparsers.add_parser(
        "solve",
        parents=[common],
        help="Compute a defender strategy",
        description="Run one equilibrium solver on an instance file and write its report",
    )
    solve_parser.add_argument("instance", help="Instance JSON file")
    solve_parser.add_argument(
        "--structure", choices=["disjoint", "nondisjoint"], default="nondisjoint"
    )
    solve_parser.add_argument(
        "--preferences",
        choices=["known", "stochastic", "asymmetric", "adversarial"],
        default="known",
    )
    solve_parser.add_argument("--marginal", type=float, help="Constant Pr[theta_v = 1]")
    solve_parser.add_argument("--num-samples", type=int, default=20)
    solve_parser.add_argument("--flip-budget", type=int, help="Adversarial flip radius")
    solve_parser.add_argument("--epsilon", type=float, default=0.5)
    solve_parser.add_argument("--iterations", type=int, help="Number of rounds T")
    solve_parser.add_argument("--perturbation-scale", type=float)
    solve_parser.add_argument("--step-size", type=float)
    solve_parser.add_argument(
        "--update-rule", choices=["euclidean", "exponentiated"], default="exponentiated"
    )
    solve_parser.add_argument("--budget-expansion", type=float, default=1.0)
    solve_parser.add_argument("--initialization", choices=["scaled", "uniform"], default="scaled")
    solve_parser.add_argument(
        "--entropic-mode", choices=["closed-form", "exact"], default="closed-form"
    )
    solve_parser.add_argument(
        "--eager-greedy", action="store_true", help="Recompute every marginal gain"
    )
    solve_parser.add_argument("--certify", action="store_true", help="Attach a gap certificate")
    solve_parser.add_argument("--history", help="Write the per-iteration trace as CSV")

    # Gap command
    gap_parser = subparsers.add_parser(
        "gap",
        parents=[common],
        help="Certify a pair of mixed strategies",
        description="Exact best responses bracketing the game value",
    )
    gap_parser.add_argument("instance", help="Instance JSON file")
    gap_parser.add_argument("defender", help="Defender strategy or solve report")
    gap_parser.add_argument("attacker", help="Attacker strategy file")
    gap_parser.add_argument("--cap", type=int, default=2_000_000, help="Enumeration cap")

    # Experiment commands
    for name, text in (
        ("table", "Certified optimality-gap table over (k_d, k_a)"),
        ("sweep", "Attacker value versus both budgets"),
        ("uncertainty", "Known, stochastic, asymmetric and adversarial preferences"),
    ):
        experiment_parser = subparsers.add_parser(
            name, parents=[common], help=text, description=text
        )
        experiment_parser.add_argument("--config", help="Experiment configuration JSON file")
        experiment_parser.add_argument(
            "--set",
            action="append",
            metavar="SECTION.KEY=VALUE",
            help="Override one configuration field (repeatable)",
        )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main function"""
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_INVALID
    configure_logging(args.verbose, args.quiet)

    try:
        return COMMANDS[args.command](args)
    except ResourceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except GameError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
