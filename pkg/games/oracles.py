"""
Oracles

Exact ground truth at desk scale: best responses by exhaustive enumeration,
the optimality-gap certificate, matrix-game values, and property checks for
gradients and submodularity.

Both payoff sides are monotone in the chosen set (more attacked channels never
lower the payoff, more defended channels never raise it), so enumeration only
visits sets of exactly min(budget, channels) elements. Ties go to the
lexicographically smallest set, independent of enumeration order.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.special import softmax

from .errors import DomainError, ResourceError
from .game_model import GameInstance, MarginalVector, MixedStrategy, PureStrategy
from .payoffs import AttackerStrategy, check_weights, reach_profile, survival_profile

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 2_000_000
CELLS_PER_CHUNK = 4_000_000
MWU_TOLERANCE = 1e-6


@dataclass(frozen=True)
class GapCertificate:
    """Bracket on the game value from two exact best responses"""

    upper: float
    lower: float
    attacker_response: PureStrategy
    defender_response: PureStrategy

    @property
    def gap_defined(self) -> bool:
        return self.lower > 0.0

    @property
    def gap(self) -> Optional[float]:
        """(b_u - b_l) / b_l, or None when b_l is zero"""
        if not self.gap_defined:
            return None
        return max(0.0, (self.upper - self.lower) / self.lower)

    def to_dict(self) -> dict:
        return {
            "upper": self.upper,
            "lower": self.lower,
            "gap": self.gap,
            "gap_defined": self.gap_defined,
            "attacker_response": list(self.attacker_response.channels),
            "defender_response": list(self.defender_response.channels),
        }


def _check_cap(count: int, cap: int, what: str) -> None:
    if count > cap:
        raise ResourceError(
            f"{what} needs {count} evaluations, above the enumeration cap of {cap}"
        )


def _subset_chunks(
    num_items: int, size: int, chunk: int, reverse: bool = False
) -> Iterator[np.ndarray]:
    """Yield (rows, size) index arrays covering all size-subsets of range(num_items)"""
    combos: Iterator[Tuple[int, ...]] = itertools.combinations(range(num_items), size)
    if reverse:
        combos = reversed(list(combos))
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.int64).reshape(len(block), size)


def dense_factors(inst: GameInstance, values: np.ndarray) -> np.ndarray:
    """(real channels x voters) matrix of per-edge factors, 1 where there is no edge"""
    dense = np.ones((inst.num_real_channels, inst.num_voters))
    real = inst.channels < inst.num_real_channels
    dense[inst.channels[real], inst.voters[real]] = values[real]
    return dense


def _subset_products(dense: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    product = np.ones((subsets.shape[0], dense.shape[1]))
    for column in range(subsets.shape[1]):
        product *= dense[subsets[:, column]]
    return product


def _pick(
    best: Optional[Tuple[float, Tuple[int, ...]]],
    values: np.ndarray,
    subsets: np.ndarray,
    maximize: bool,
) -> Tuple[float, Tuple[int, ...]]:
    target = values.max() if maximize else values.min()
    tied = subsets[values == target]
    candidate = (float(target), min(tuple(int(u) for u in row) for row in tied))
    if best is None:
        return candidate
    better = candidate[0] > best[0] if maximize else candidate[0] < best[0]
    if better or (candidate[0] == best[0] and candidate[1] < best[1]):
        return candidate
    return best


def _pseudo_gains(
    inst: GameInstance, w: np.ndarray, survival: np.ndarray, failure: np.ndarray
) -> np.ndarray:
    """Gain of attacking each voter's pseudo-channel on top of a real attack set"""
    return survival * (1.0 - w * (1.0 - failure))


def exact_attacker_best_response(
    inst: GameInstance,
    weights,
    sigma_d: MixedStrategy,
    cap: int = DEFAULT_ENUMERATION_CAP,
    reverse: bool = False,
) -> Tuple[PureStrategy, float]:
    """Exact argmax of E_{S_d ~ sigma_d}[f(S_d, S_a)] over feasible attacker sets.

    On extended instances the constraint is the partition "at most k_a real
    channels and at most the flip budget of pseudo-channels". For a fixed real
    set the pseudo part is modular, so its best completion is the top gains.
    """
    w = check_weights(inst, weights)
    survival = survival_profile(inst, sigma_d)
    m_real = inst.num_real_channels
    size = min(inst.attacker_budget, m_real)
    _check_cap(math.comb(m_real, size), cap, "attacker best response")
    logger.debug("Enumerating %d attacker sets of size %d", math.comb(m_real, size), size)

    dense = dense_factors(inst, 1.0 - inst.p)
    weighted = survival * w
    flips = inst.flip_budget if inst.is_extended else 0
    chunk = max(1, CELLS_PER_CHUNK // max(inst.num_voters, 1))

    best: Optional[Tuple[float, Tuple[int, ...]]] = None
    for subsets in _subset_chunks(m_real, size, chunk, reverse):
        failure = _subset_products(dense, subsets)
        values = weighted.sum() - failure @ weighted
        if flips:
            gains = _pseudo_gains(inst, w, survival, failure)
            values = values + -np.sort(-gains, axis=1)[:, :flips].sum(axis=1)
        best = _pick(best, values, subsets, maximize=True)
    assert best is not None

    value, real_set = best
    channels = list(real_set)
    if flips:
        failure = _subset_products(dense, np.array([real_set], dtype=np.int64).reshape(1, size))
        gains = _pseudo_gains(inst, w, survival, failure[0])
        order = np.argsort(-gains, kind="stable")[:flips]
        channels.extend(int(m_real + v) for v in np.sort(order))
    return PureStrategy(tuple(channels)), value


def exact_defender_best_response(
    inst: GameInstance,
    weights,
    sigma_a: AttackerStrategy,
    cap: int = DEFAULT_ENUMERATION_CAP,
    reverse: bool = False,
) -> Tuple[PureStrategy, float]:
    """Exact argmin of E_{S_a ~ sigma_a}[f(S_d, S_a)] over defender sets.

    ``sigma_a`` may also be a marginal vector or a list of them, read as
    independent inclusion (respectively a uniform mixture of such), or a
    precomputed per-voter reach profile.
    """
    if isinstance(sigma_a, np.ndarray):
        reach = sigma_a
    else:
        reach = reach_profile(inst, weights, sigma_a)
    m_real = inst.num_real_channels
    size = min(inst.defender_budget, m_real)
    _check_cap(math.comb(m_real, size), cap, "defender best response")
    logger.debug("Enumerating %d defender sets of size %d", math.comb(m_real, size), size)

    dense = dense_factors(inst, 1.0 - inst.q)
    chunk = max(1, CELLS_PER_CHUNK // max(inst.num_voters, 1))
    best: Optional[Tuple[float, Tuple[int, ...]]] = None
    for subsets in _subset_chunks(m_real, size, chunk, reverse):
        values = _subset_products(dense, subsets) @ reach
        best = _pick(best, values, subsets, maximize=False)
    assert best is not None
    return PureStrategy(best[1]), best[0]


def optimality_gap(
    inst: GameInstance,
    weights,
    sigma_d: MixedStrategy,
    sigma_a: AttackerStrategy,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> GapCertificate:
    """Certify a defender mixture against the value bracket [b_l, b_u]"""
    attacker_response, upper = exact_attacker_best_response(inst, weights, sigma_d, cap)
    defender_response, lower = exact_defender_best_response(inst, weights, sigma_a, cap)
    return GapCertificate(
        upper=upper,
        lower=lower,
        attacker_response=attacker_response,
        defender_response=defender_response,
    )


@dataclass(frozen=True)
class MatrixGameResult:
    """Solution of the enumerated zero-sum game (defender minimizes)"""

    value: float
    lower: float
    upper: float
    defender: MixedStrategy
    attacker: MixedStrategy
    converged: bool
    iterations: int
    method: str

    @property
    def duality_gap(self) -> float:
        return self.upper - self.lower


def _attacker_sets(inst: GameInstance) -> List[PureStrategy]:
    m_real = inst.num_real_channels
    real_sets = itertools.combinations(range(m_real), min(inst.attacker_budget, m_real))
    if not inst.is_extended or inst.flip_budget == 0:
        return [PureStrategy(s) for s in real_sets]
    pseudo_sets = list(
        itertools.combinations(range(m_real, inst.num_channels), inst.flip_budget)
    )
    return [PureStrategy(r + s) for r in real_sets for s in pseudo_sets]


def payoff_matrix(
    inst: GameInstance, weights, cap: int = DEFAULT_ENUMERATION_CAP
) -> Tuple[np.ndarray, List[PureStrategy], List[PureStrategy]]:
    """Full payoff matrix: rows are defender sets, columns attacker sets"""
    m_real = inst.num_real_channels
    rows = math.comb(m_real, min(inst.defender_budget, m_real))
    cols = math.comb(m_real, min(inst.attacker_budget, m_real))
    if inst.is_extended:
        cols *= math.comb(inst.num_voters, inst.flip_budget)
    _check_cap(rows * cols, cap, "payoff matrix")

    defender_sets = [
        PureStrategy(s)
        for s in itertools.combinations(range(m_real), min(inst.defender_budget, m_real))
    ]
    attacker_sets = _attacker_sets(inst)
    survival = np.array([survival_profile(inst, s) for s in defender_sets])
    reach = np.array([reach_profile(inst, weights, s) for s in attacker_sets])
    return survival @ reach.T, defender_sets, attacker_sets


def _mixture(strategies: Sequence[PureStrategy], probabilities: np.ndarray) -> MixedStrategy:
    probabilities = np.where(probabilities > 1e-12, probabilities, 0.0)
    keep = np.flatnonzero(probabilities)
    kept = probabilities[keep] / probabilities[keep].sum()
    return MixedStrategy(tuple(strategies[i] for i in keep), kept)


def _solve_mwu(
    matrix: np.ndarray, tol: float, max_iterations: int, check_every: int
) -> Tuple[np.ndarray, np.ndarray, int, bool]:
    """Optimistic multiplicative-weights self-play on a [0, 1]-scaled matrix"""
    rows, cols = matrix.shape
    step = 0.25
    row_loss = np.zeros(rows)
    col_gain = np.zeros(cols)
    last_row = np.zeros(rows)
    last_col = np.zeros(cols)
    sum_x = np.zeros(rows)
    sum_y = np.zeros(cols)
    for iteration in range(1, max_iterations + 1):
        x = softmax(-step * (row_loss + last_row))
        y = softmax(step * (col_gain + last_col))
        last_row = matrix @ y
        last_col = matrix.T @ x
        row_loss += last_row
        col_gain += last_col
        sum_x += x
        sum_y += y
        if iteration % check_every == 0 or iteration == max_iterations:
            x_bar, y_bar = sum_x / iteration, sum_y / iteration
            if (matrix.T @ x_bar).max() - (matrix @ y_bar).min() <= tol:
                return x_bar, y_bar, iteration, True
    return sum_x / max_iterations, sum_y / max_iterations, max_iterations, False


def _solve_lp(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Exact minimax mixtures via HiGHS; the attacker mixture comes from the duals"""
    rows, cols = matrix.shape
    c = np.zeros(rows + 1)
    c[-1] = 1.0
    a_ub = np.hstack([matrix.T, -np.ones((cols, 1))])
    a_eq = np.zeros((1, rows + 1))
    a_eq[0, :rows] = 1.0
    result = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(cols),
        A_eq=a_eq,
        b_eq=np.ones(1),
        bounds=[(0, None)] * rows + [(None, None)],
        method="highs",
    )
    if result.status != 0:
        raise DomainError(f"matrix game LP failed: {result.message}")
    x = np.clip(result.x[:rows], 0.0, None)
    y = np.clip(-np.asarray(result.ineqlin.marginals), 0.0, None)
    if y.sum() <= 0:
        y = np.ones(cols)
    return x / x.sum(), y / y.sum()


def matrix_game_value(
    inst: GameInstance,
    weights,
    cap: int = DEFAULT_ENUMERATION_CAP,
    method: str = "mwu",
    tol: float = MWU_TOLERANCE,
    max_iterations: int = 200_000,
    check_every: int = 50,
) -> MatrixGameResult:
    """Value and near-equilibrium mixtures of the enumerated game.

    Args:
        inst: Game instance, possibly extended
        weights: Voter weights
        cap: Largest allowed number of payoff-matrix cells
        method: "mwu" for certified multiplicative-weights self-play, "lp" for HiGHS
        tol: Duality-gap target for "mwu"
        max_iterations: Self-play iteration limit before reporting non-convergence
        check_every: Iterations between duality-gap checks

    Returns:
        MatrixGameResult; ``lower <= value <= upper`` always brackets the true value
    """
    matrix, defender_sets, attacker_sets = payoff_matrix(inst, weights, cap)
    logger.debug("Solving %dx%d matrix game with %s", matrix.shape[0], matrix.shape[1], method)
    scale = float(matrix.max())
    if scale <= 0.0:
        x = np.zeros(matrix.shape[0])
        y = np.zeros(matrix.shape[1])
        x[0] = y[0] = 1.0
        iterations, converged = 0, True
    elif method == "mwu":
        x, y, iterations, converged = _solve_mwu(
            matrix / scale, tol / scale, max_iterations, check_every
        )
    elif method == "lp":
        x, y = _solve_lp(matrix)
        iterations, converged = 0, True
    else:
        raise ValueError(f"Unknown matrix game method: {method}")

    upper = float((matrix.T @ x).max())
    lower = float((matrix @ y).min())
    if method == "lp":
        converged = upper - lower <= tol
    if not converged:
        logger.warning(
            "Matrix game solver stopped with duality gap %.3g after %d iterations",
            upper - lower,
            iterations,
        )
    return MatrixGameResult(
        value=0.5 * (upper + lower),
        lower=lower,
        upper=upper,
        defender=_mixture(defender_sets, x),
        attacker=_mixture(attacker_sets, y),
        converged=converged,
        iterations=iterations,
        method=method,
    )


@dataclass(frozen=True)
class SubmodularityViolation:
    kind: str
    base: Tuple[int, ...]
    elements: Tuple[int, ...]
    amount: float


def check_submodular_monotone(
    set_function: Callable[[PureStrategy], float], ground_size: int, tol: float = 1e-9
) -> List[SubmodularityViolation]:
    """Exhaustively test monotonicity and diminishing returns.

    Uses the local form of diminishing returns: for every A and distinct
    u, w outside A, f(A+u) + f(A+w) >= f(A+u+w) + f(A), which is equivalent to
    submodularity on a finite ground set.
    """
    if ground_size > 12:
        raise DomainError(f"ground set of {ground_size} is too large to check exhaustively")
    masks = 1 << ground_size
    values = np.empty(masks)
    for mask in range(masks):
        values[mask] = set_function(
            PureStrategy(tuple(i for i in range(ground_size) if mask >> i & 1))
        )

    def members(mask: int) -> Tuple[int, ...]:
        return tuple(i for i in range(ground_size) if mask >> i & 1)

    violations: List[SubmodularityViolation] = []
    for mask in range(masks):
        outside = [i for i in range(ground_size) if not mask >> i & 1]
        for u in outside:
            drop = values[mask] - values[mask | 1 << u]
            if drop > tol:
                violations.append(SubmodularityViolation("monotone", members(mask), (u,), drop))
        for u, w in itertools.combinations(outside, 2):
            excess = (
                values[mask | 1 << u | 1 << w]
                + values[mask]
                - values[mask | 1 << u]
                - values[mask | 1 << w]
            )
            if excess > tol:
                violations.append(
                    SubmodularityViolation("diminishing-returns", members(mask), (u, w), excess)
                )
    return violations


def finite_difference_gradient(
    function: Callable[[np.ndarray], float], x, h: float = 1e-6
) -> np.ndarray:
    """Central differences (F(x + h e_u) - F(x - h e_u)) / 2h at a box-interior point"""
    x = np.asarray(x, dtype=float)
    if h <= 0:
        raise DomainError(f"step must be positive, got {h}")
    if np.any(x - h < 0.0) or np.any(x + h > 1.0):
        raise DomainError("finite differences need a margin of h inside [0, 1]")
    gradient = np.empty_like(x)
    for u in range(x.shape[0]):
        step = np.zeros_like(x)
        step[u] = h
        gradient[u] = (function(x + step) - function(x - step)) / (2.0 * h)
    return gradient


def marginal_expected_payoff(
    inst: GameInstance, weights, sigma_d: MixedStrategy, marginals: Sequence[MarginalVector]
) -> float:
    """E[f] of a defender mixture against a uniform mixture of marginal vectors"""
    return float(np.dot(survival_profile(inst, sigma_d), reach_profile(inst, weights, marginals)))
