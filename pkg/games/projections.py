"""
Projections

Feasible-set geometry for both solvers: top-k selection on score vectors and
projections onto the capped simplex {x : sum(x) <= k, 0 <= x <= 1} under the
Euclidean and entropic geometries, plus block-wise projections for partition
constraints.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from .errors import DomainError
from .game_model import PureStrategy


class Geometry(Enum):
    EUCLIDEAN = "euclidean"
    ENTROPIC = "entropic"


class EntropicMode(Enum):
    CLOSED_FORM = "closed-form"
    EXACT = "exact"


@dataclass(frozen=True)
class CappedSimplex:
    """{x in R^dimension : sum(x) <= budget, 0 <= x <= 1}"""

    dimension: int
    budget: float

    def __post_init__(self):
        if not 0 < self.budget <= self.dimension:
            raise DomainError(
                f"capped simplex needs 0 < budget <= dimension, got budget={self.budget} "
                f"dimension={self.dimension}"
            )

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(
            x.shape == (self.dimension,)
            and np.all(x >= -tol)
            and np.all(x <= 1.0 + tol)
            and x.sum() <= self.budget + tol
        )


def top_k(scores, k: int) -> PureStrategy:
    """Indices of the k largest scores, ties broken by lowest index"""
    scores = np.asarray(scores, dtype=float)
    if k < 0 or k > scores.shape[0]:
        raise DomainError(f"cannot select {k} of {scores.shape[0]} entries")
    if k == 0:
        return PureStrategy()
    order = np.argsort(-scores, kind="stable")
    return PureStrategy(tuple(int(i) for i in np.sort(order[:k])))


def _clipped_mass(sorted_y: np.ndarray, prefix: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """sum_i clip(y_i - tau, 0, 1) for each tau, with y sorted ascending"""
    d = sorted_y.shape[0]
    full_from = np.searchsorted(sorted_y, tau + 1.0, side="left")
    partial_from = np.searchsorted(sorted_y, tau, side="right")
    count = full_from - partial_from
    partial_sum = prefix[full_from] - prefix[partial_from]
    return (d - full_from) + partial_sum - count * tau


def project_euclidean(y, budget: float) -> np.ndarray:
    """Euclidean projection onto the capped simplex.

    The solution is clip(y - tau, 0, 1) with tau = 0 when that already fits the
    budget, otherwise the unique tau > 0 where the clipped mass equals the
    budget. tau is located between consecutive sorted breakpoints {y_i, y_i - 1}.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DomainError("projection input must be finite")
    CappedSimplex(y.shape[0], budget)
    clipped = np.clip(y, 0.0, 1.0)
    if clipped.sum() <= budget:
        return clipped

    sorted_y = np.sort(y)
    prefix = np.concatenate([[0.0], np.cumsum(sorted_y)])
    breakpoints = np.unique(np.concatenate([sorted_y, sorted_y - 1.0, [0.0]]))
    breakpoints = breakpoints[breakpoints >= 0.0]
    mass = _clipped_mass(sorted_y, prefix, breakpoints)

    # mass is nonincreasing in tau; mass(0) > budget
    upper = int(np.argmax(mass <= budget))
    lo, hi = breakpoints[upper - 1], breakpoints[upper]
    mass_lo, mass_hi = mass[upper - 1], mass[upper]
    tau = lo + (mass_lo - budget) * (hi - lo) / (mass_lo - mass_hi)
    return np.clip(y - tau, 0.0, 1.0)


def project_entropic(y, budget: float, mode: EntropicMode = EntropicMode.CLOSED_FORM) -> np.ndarray:
    """Entropic (generalized KL) projection onto the capped simplex.

    The closed form clips at 1 and rescales by exp(-lambda) with
    lambda = max(0, ln(sum(z) / k)). The exact mode fixes coordinates at 1 and
    rescales the remainder until no free coordinate exceeds 1, which satisfies
    the KKT conditions of the true Bregman projection.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)) or np.any(y <= 0.0):
        raise DomainError("entropic projection needs strictly positive finite input")
    CappedSimplex(y.shape[0], budget)
    mode = EntropicMode(mode)

    z = np.minimum(y, 1.0)
    if mode is EntropicMode.CLOSED_FORM:
        lam = max(0.0, float(np.log(z.sum() / budget)))
        return z * np.exp(-lam)

    if z.sum() <= budget:
        return z
    capped = np.zeros(y.shape[0], dtype=bool)
    while True:
        free_mass = y[~capped].sum()
        scale = (budget - capped.sum()) / free_mass
        candidate = np.where(capped, 1.0, y * scale)
        overflow = (~capped) & (candidate >= 1.0)
        if not overflow.any():
            return candidate
        capped |= overflow


def kl_divergence(x, y) -> float:
    """Generalized KL divergence sum x log(x/y) - x + y, with 0 log 0 = 0"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(x > 0, x * np.log(x / y), 0.0)
    return float(np.sum(terms - x + y))


def project(
    y,
    budget: float,
    geometry: Geometry = Geometry.EUCLIDEAN,
    mode: EntropicMode = EntropicMode.CLOSED_FORM,
) -> np.ndarray:
    """Single-block projection in the chosen geometry; a zero budget pins to 0"""
    y = np.asarray(y, dtype=float)
    if budget == 0 or y.shape[0] == 0:
        return np.zeros(y.shape[0])
    if Geometry(geometry) is Geometry.EUCLIDEAN:
        return project_euclidean(y, budget)
    return project_entropic(y, budget, mode)


def project_partition(
    y,
    blocks: Sequence[Tuple[Sequence[int], float]],
    geometry: Geometry = Geometry.EUCLIDEAN,
    mode: EntropicMode = EntropicMode.CLOSED_FORM,
) -> np.ndarray:
    """Project each block of a partition onto its own capped simplex.

    Args:
        y: Point to project
        blocks: (indices, budget) pairs; indices must partition range(len(y))
        geometry: Euclidean or entropic
        mode: Entropic projection mode

    Returns:
        Concatenated block-wise projection in the original index order
    """
    y = np.asarray(y, dtype=float)
    seen = np.zeros(y.shape[0], dtype=int)
    for indices, _ in blocks:
        seen[np.asarray(indices, dtype=np.int64)] += 1
    if np.any(seen > 1):
        raise DomainError("partition blocks overlap")
    if np.any(seen == 0):
        raise DomainError("partition blocks do not cover every index")

    out = np.empty_like(y)
    for indices, budget in blocks:
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size:
            out[indices] = project(y[indices], budget, geometry, mode)
    return out
