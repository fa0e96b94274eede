"""
Experiment Runners

Gap tables, budget sweeps and the preference-uncertainty comparison. Every
runner takes an ExperimentConfig and returns a ResultTable; replications are
seeded from the master seed by derive_seed and assembled in a fixed order, so
reruns with the same configuration produce the same bytes.
"""

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np

from games.errors import ResourceError
from games.game_model import (
    GameInstance,
    MarginalPreferences,
    MixedStrategy,
    PureStrategy,
)
from games.oracles import exact_attacker_best_response, optimality_gap
from games.uncertainty import adversarial_extend, draw_preference_samples
from solvers.ftpl import FtplAdversarialSolver, FtplSolver
from solvers.online_gradient import OnlineGradientSolver, online_gradient_solve

from .config import ExperimentConfig, derive_seed
from .generator import generate_instance

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# Salts that keep the random streams of one replication apart
INSTANCE_STREAM = 0
SOLVER_STREAM = 1
SAMPLE_STREAM = 2


@dataclass
class ResultTable:
    """Rows of one experiment with the parameters that produced them"""

    name: str
    parameters: Dict[str, Any]
    columns: List[str]
    rows: List[List[Any]] = field(default_factory=list)
    flags: Dict[str, Any] = field(default_factory=dict)

    def preamble(self) -> str:
        flat = _flatten(self.parameters)
        return "# " + ";".join(f"{key}={flat[key]}" for key in sorted(flat))

    def to_csv(self) -> str:
        buffer = io.StringIO()
        buffer.write(self.preamble() + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_format(value) for value in row])
        return buffer.getvalue()

    def write(self, path: Union[str, Path]) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(self.to_csv(), encoding="utf-8")
        logger.info("Wrote %s table to %s", self.name, target)
        return target

    def column(self, name: str) -> List[Any]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]


def _flatten(parameters: Dict[str, Any], prefix: str = "") -> Dict[str, str]:
    flat: Dict[str, str] = {}
    for key, value in parameters.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, prefix=f"{name}."))
        elif isinstance(value, (list, tuple)):
            flat[name] = json.dumps(list(value))
        else:
            flat[name] = str(value)
    return flat


def _format(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


def _map(function: Callable[[T], R], items: Sequence[T], workers: int) -> List[R]:
    """Order-preserving map, in worker processes when more than one is requested"""
    if workers <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(function, items))


def _replication_instance(cfg: ExperimentConfig, replication: int):
    return generate_instance(cfg.generator, derive_seed(cfg.seed, replication, INSTANCE_STREAM))


def _solve_defender(
    cfg: ExperimentConfig, inst: GameInstance, weights, replication: int
) -> MixedStrategy:
    """Defender mixture from the configured solver family"""
    if cfg.solver.structure == "disjoint":
        ftpl = replace(cfg.ftpl, seed=derive_seed(cfg.seed, replication, SOLVER_STREAM))
        return FtplSolver(inst, weights, ftpl).solve().defender
    return online_gradient_solve(inst, weights, cfg.mirror).defender


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    if not values:
        return float("nan"), float("nan")
    array = np.asarray(values, dtype=float)
    return float(array.mean()), float(array.std())


# ---------------------------------------------------------------------------
# Gap table
# ---------------------------------------------------------------------------

GAP_COLUMNS = [
    "k_d",
    "k_a",
    "gap_mean",
    "gap_std",
    "upper_mean",
    "lower_mean",
    "defined",
    "undefined",
    "skipped",
    "status",
    "seed",
]


@dataclass(frozen=True)
class _GapJob:
    cfg: ExperimentConfig
    replication: int
    attacker_budget: int
    defender_budget: int


def _gap_replication(job: _GapJob) -> Optional[Tuple[float, float, Optional[float]]]:
    inst, prefs = _replication_instance(job.cfg, job.replication)
    inst = inst.with_budgets(job.attacker_budget, job.defender_budget)
    mirror = replace(job.cfg.mirror, budget_expansion=1.0, certify=False)
    report = online_gradient_solve(inst, prefs.theta, mirror)
    try:
        certificate = optimality_gap(inst, prefs.theta, report.defender, report.marginal_trace)
    except ResourceError as e:
        logger.warning("Skipping replication %d: %s", job.replication, e)
        return None
    return certificate.upper, certificate.lower, certificate.gap


def run_gap_table(cfg: ExperimentConfig) -> ResultTable:
    """Certified optimality gap of the online gradient solver per (k_d, k_a) cell"""
    cfg.validate()
    table = ResultTable("gap", cfg.to_dict(), list(GAP_COLUMNS))
    for k_d in cfg.sweep.defender_budgets:
        if k_d < 1:
            logger.warning("Gap table skips k_d=%d (no defense to certify)", k_d)
            continue
        for k_a in cfg.sweep.attacker_budgets:
            logger.info("Gap cell k_d=%d k_a=%d: %d replications", k_d, k_a, cfg.replications)
            jobs = [_GapJob(cfg, r, k_a, k_d) for r in range(cfg.replications)]
            results = _map(_gap_replication, jobs, cfg.workers)
            completed = [result for result in results if result is not None]
            gaps = [gap for _, _, gap in completed if gap is not None]
            gap_mean, gap_std = _mean_std(gaps)
            upper_mean, _ = _mean_std([upper for upper, _, _ in completed])
            lower_mean, _ = _mean_std([lower for _, lower, _ in completed])
            skipped = len(results) - len(completed)
            undefined = len(completed) - len(gaps)
            if not completed:
                status = "skipped"
            elif not gaps:
                status = "undefined"
            else:
                status = "ok"
            table.rows.append(
                [
                    k_d,
                    k_a,
                    gap_mean,
                    gap_std,
                    upper_mean,
                    lower_mean,
                    len(gaps),
                    undefined,
                    skipped,
                    status,
                    cfg.seed,
                ]
            )
            logger.info("Gap cell k_d=%d k_a=%d: %.4f +/- %.4f", k_d, k_a, gap_mean, gap_std)
    return table


# ---------------------------------------------------------------------------
# Budget sweep
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = ["k_a", "k_d", "value_mean", "value_std", "replications", "seed"]


@dataclass(frozen=True)
class _SweepJob:
    cfg: ExperimentConfig
    replication: int


def _sweep_replication(job: _SweepJob) -> Dict[Tuple[int, int], float]:
    cfg = job.cfg
    inst, prefs = _replication_instance(cfg, job.replication)
    values: Dict[Tuple[int, int], float] = {}
    for k_a in cfg.sweep.attacker_budgets:
        for k_d in cfg.sweep.defender_budgets:
            if k_d == 0:
                # No defense: the attacker's unprotected optimum
                cell = inst.with_budgets(k_a, 1)
                defender = MixedStrategy.point(PureStrategy(()))
            else:
                cell = inst.with_budgets(k_a, k_d)
                defender = _solve_defender(cfg, cell, prefs.theta, job.replication)
            _, value = exact_attacker_best_response(cell, prefs.theta, defender)
            values[(k_a, k_d)] = value
    return values


def _monotone(values: Sequence[float], increasing: bool, tol: float = 1e-9) -> bool:
    steps = np.diff(np.asarray(values, dtype=float))
    return bool(np.all(steps >= -tol)) if increasing else bool(np.all(steps <= tol))


def run_budget_sweep(cfg: ExperimentConfig) -> ResultTable:
    """Attacker equilibrium value b_u against the defender mixture, per (k_a, k_d)"""
    cfg.validate()
    table = ResultTable("sweep", cfg.to_dict(), list(SWEEP_COLUMNS))
    jobs = [_SweepJob(cfg, r) for r in range(cfg.replications)]
    results = _map(_sweep_replication, jobs, cfg.workers)

    k_as = sorted(cfg.sweep.attacker_budgets)
    k_ds = sorted(cfg.sweep.defender_budgets)
    means: Dict[Tuple[int, int], float] = {}
    for k_a in k_as:
        for k_d in k_ds:
            mean, std = _mean_std([result[(k_a, k_d)] for result in results])
            means[(k_a, k_d)] = mean
            table.rows.append([k_a, k_d, mean, std, len(results), cfg.seed])

    table.flags["nonincreasing_in_k_d"] = all(
        _monotone([means[(k_a, k_d)] for k_d in k_ds], increasing=False) for k_a in k_as
    )
    table.flags["nondecreasing_in_k_a"] = all(
        _monotone([means[(k_a, k_d)] for k_a in k_as], increasing=True) for k_d in k_ds
    )
    logger.info("Budget sweep trends: %s", table.flags)
    return table


# ---------------------------------------------------------------------------
# Preference uncertainty
# ---------------------------------------------------------------------------

UNCERTAINTY_COLUMNS = ["setting", "flip_budget", "value_mean", "value_std", "replications", "seed"]


@dataclass(frozen=True)
class _UncertaintyJob:
    cfg: ExperimentConfig
    replication: int


def _uncertainty_replication(job: _UncertaintyJob) -> Dict[Tuple[str, int], float]:
    cfg = job.cfg
    r = job.replication
    inst, prefs = _replication_instance(cfg, r)
    theta = prefs.theta
    marginals = np.full(inst.num_voters, cfg.uncertainty.marginal)
    disjoint = cfg.solver.structure == "disjoint"
    ftpl = replace(cfg.ftpl, seed=derive_seed(cfg.seed, r, SOLVER_STREAM))
    # Shared step size so that flip budget 0 reproduces the known setting
    mirror = replace(
        cfg.mirror, step_size=OnlineGradientSolver(inst, theta, cfg.mirror).step_size()
    )
    values: Dict[Tuple[str, int], float] = {}

    def solve(weights, samples=None) -> MixedStrategy:
        if disjoint:
            return FtplSolver(inst, weights, ftpl, samples=samples).solve().defender
        return OnlineGradientSolver(inst, weights, mirror, samples=samples).solve().defender

    defender = solve(theta)
    values[("known", 0)] = exact_attacker_best_response(inst, theta, defender)[1]

    defender = solve(marginals)
    values[("stochastic", 0)] = exact_attacker_best_response(inst, marginals, defender)[1]

    drawn = draw_preference_samples(
        MarginalPreferences(marginals),
        cfg.uncertainty.num_samples,
        derive_seed(cfg.seed, r, SAMPLE_STREAM),
    )
    samples = list(drawn.samples)
    defender = solve(samples[0], samples)
    values[("asymmetric", 0)] = float(
        np.mean([exact_attacker_best_response(inst, w, defender)[1] for w in samples])
    )

    for flips in cfg.uncertainty.flip_budgets:
        extension = adversarial_extend(inst, theta, flips)
        if disjoint:
            defender = FtplAdversarialSolver(inst, theta, flips, ftpl).solve().defender
        else:
            defender = OnlineGradientSolver(
                extension.instance, extension.weights, mirror
            ).solve().defender
        values[("adversarial", flips)] = exact_attacker_best_response(
            extension.instance, extension.weights, defender
        )[1]
    return values


def _relative_difference(value: float, reference: float) -> float:
    if reference == 0.0:
        return 0.0 if value == 0.0 else float("inf")
    return abs(value - reference) / reference


def run_uncertainty_suite(cfg: ExperimentConfig) -> ResultTable:
    """Robust attacker value under known, stochastic, asymmetric and adversarial preferences"""
    cfg.validate()
    table = ResultTable("uncertainty", cfg.to_dict(), list(UNCERTAINTY_COLUMNS))
    jobs = [_UncertaintyJob(cfg, r) for r in range(cfg.replications)]
    results = _map(_uncertainty_replication, jobs, cfg.workers)

    flips = sorted(set(cfg.uncertainty.flip_budgets))
    keys = [("known", 0), ("stochastic", 0), ("asymmetric", 0)]
    keys += [("adversarial", ell) for ell in flips]
    means: Dict[Tuple[str, int], float] = {}
    for key in keys:
        mean, std = _mean_std([result[key] for result in results])
        means[key] = mean
        table.rows.append([key[0], key[1], mean, std, len(results), cfg.seed])

    known = means[("known", 0)]
    stochastic_gap = _relative_difference(means[("stochastic", 0)], known)
    asymmetric_gap = _relative_difference(means[("asymmetric", 0)], known)
    table.flags["stochastic_vs_known"] = stochastic_gap
    table.flags["asymmetric_vs_known"] = asymmetric_gap
    table.flags["stochastic_within_tolerance"] = stochastic_gap <= cfg.uncertainty.tolerance
    table.flags["adversarial_nondecreasing"] = _monotone(
        [means[("adversarial", ell)] for ell in flips], increasing=True
    )
    logger.info("Uncertainty suite: %s", table.flags)
    return table
