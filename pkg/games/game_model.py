"""
Game Model

Data types for the attacker-defender misinformation game: the channel-voter
instance, voter preference models, pure and mixed channel strategies, and
fractional attacker marginals.

Edges are stored sparsely as parallel arrays sorted by (channel, voter). A
missing channel-voter pair behaves as p = q = 0 and never densifies.
"""

from collections import OrderedDict
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DomainError, InstanceError, InvalidStrategyError

MASS_TOLERANCE = 1e-9


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class GameInstance:
    """Bipartite channel-voter graph with per-edge attack/defense probabilities.

    Extended instances (built by ``adversarial_extend``) carry one pseudo-channel
    per voter after the real channels: pseudo-channel ``num_real_channels + v``
    has a single edge to voter v with p = 1 and q = 0 and, when attacked,
    activates v regardless of its preference.
    """

    num_channels: int
    num_voters: int
    channels: np.ndarray
    voters: np.ndarray
    p: np.ndarray
    q: np.ndarray
    attacker_budget: int
    defender_budget: int
    num_pseudo_channels: int = 0
    flip_budget: int = 0
    channel_offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        channels = np.asarray(self.channels, dtype=np.int64)
        voters = np.asarray(self.voters, dtype=np.int64)
        p = np.asarray(self.p, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if not (channels.shape == voters.shape == p.shape == q.shape) or channels.ndim != 1:
            raise InstanceError(["edge arrays must be one-dimensional and of equal length"])

        order = np.lexsort((voters, channels))
        object.__setattr__(self, "channels", _frozen(channels[order]))
        object.__setattr__(self, "voters", _frozen(voters[order]))
        object.__setattr__(self, "p", _frozen(p[order]))
        object.__setattr__(self, "q", _frozen(q[order]))

        width = max(self.num_channels, 0)
        counts = np.bincount(
            np.clip(self.channels, 0, max(width - 1, 0)), minlength=width
        )[:width]
        offsets = np.zeros(width + 1, dtype=np.int64)
        offsets[1:] = np.cumsum(counts)
        object.__setattr__(self, "channel_offsets", _frozen(offsets))

    @classmethod
    def from_edges(
        cls,
        num_channels: int,
        num_voters: int,
        edges: Iterable[Sequence[float]],
        attacker_budget: int,
        defender_budget: int,
        validate: bool = True,
    ) -> "GameInstance":
        """Build an instance from (u, v, p, q) tuples.

        Args:
            num_channels: Number of channels m
            num_voters: Number of voters n
            edges: Iterable of (channel, voter, p, q)
            attacker_budget: k_a
            defender_budget: k_d
            validate: Raise InstanceError when invariants are violated

        Returns:
            GameInstance
        """
        rows = [tuple(edge) for edge in edges]
        if any(len(row) != 4 for row in rows):
            raise InstanceError(["every edge must be a (channel, voter, p, q) tuple"])
        channels = np.array([int(row[0]) for row in rows], dtype=np.int64)
        voters = np.array([int(row[1]) for row in rows], dtype=np.int64)
        p = np.array([float(row[2]) for row in rows], dtype=float)
        q = np.array([float(row[3]) for row in rows], dtype=float)
        instance = cls(
            num_channels=int(num_channels),
            num_voters=int(num_voters),
            channels=channels,
            voters=voters,
            p=p,
            q=q,
            attacker_budget=int(attacker_budget),
            defender_budget=int(defender_budget),
        )
        if validate:
            report = validate_instance(instance)
            if not report.ok:
                raise InstanceError(report.violations)
        return instance

    @property
    def num_real_channels(self) -> int:
        return self.num_channels - self.num_pseudo_channels

    @property
    def num_edges(self) -> int:
        return int(self.channels.shape[0])

    @property
    def is_extended(self) -> bool:
        return self.num_pseudo_channels > 0

    @property
    def is_disjoint(self) -> bool:
        """True iff every voter has at most one incident edge"""
        if self.num_edges == 0:
            return True
        return bool(np.bincount(self.voters, minlength=self.num_voters).max() <= 1)

    def channel_edges(self, channel: int) -> slice:
        """Slice of the edge arrays incident to a channel"""
        return slice(int(self.channel_offsets[channel]), int(self.channel_offsets[channel + 1]))

    def activation_edges(self) -> np.ndarray:
        """Boolean mask of edges leaving a pseudo-channel"""
        return self.channels >= self.num_real_channels

    def with_budgets(
        self, attacker_budget: Optional[int] = None, defender_budget: Optional[int] = None
    ) -> "GameInstance":
        """Copy of the instance with different budgets"""
        return GameInstance(
            num_channels=self.num_channels,
            num_voters=self.num_voters,
            channels=self.channels.copy(),
            voters=self.voters.copy(),
            p=self.p.copy(),
            q=self.q.copy(),
            attacker_budget=(
                self.attacker_budget if attacker_budget is None else int(attacker_budget)
            ),
            defender_budget=(
                self.defender_budget if defender_budget is None else int(defender_budget)
            ),
            num_pseudo_channels=self.num_pseudo_channels,
            flip_budget=self.flip_budget,
        )

    def edge_list(self) -> List[Tuple[int, int, float, float]]:
        return [
            (int(u), int(v), float(pu), float(qu))
            for u, v, pu, qu in zip(self.channels, self.voters, self.p, self.q)
        ]

    def __str__(self) -> str:
        kind = "disjoint" if self.is_disjoint else "nondisjoint"
        return (
            f"GameInstance(m={self.num_real_channels}, n={self.num_voters}, "
            f"edges={self.num_edges}, k_a={self.attacker_budget}, "
            f"k_d={self.defender_budget}, {kind})"
        )


@dataclass
class ValidationReport:
    """Outcome of validate_instance"""

    violations: List[str]
    disjoint: bool

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_instance(inst: GameInstance) -> ValidationReport:
    """Collect every invariant violation of an instance without raising"""
    violations: List[str] = []
    m, n = inst.num_channels, inst.num_voters
    if m <= 0:
        violations.append(f"num_channels must be positive, got {m}")
    if n <= 0:
        violations.append(f"num_voters must be positive, got {n}")

    for name, values in (("p", inst.p), ("q", inst.q)):
        bad = np.flatnonzero(~((values >= 0.0) & (values <= 1.0)))
        for index in bad[:10]:
            violations.append(
                f"probability out of range: {name}={values[index]!r} on edge "
                f"({int(inst.channels[index])}, {int(inst.voters[index])})"
            )
        if bad.size > 10:
            violations.append(f"{bad.size - 10} more {name} values out of range")

    bad_channels = np.flatnonzero((inst.channels < 0) | (inst.channels >= m))
    bad_voters = np.flatnonzero((inst.voters < 0) | (inst.voters >= n))
    for index in bad_channels[:10]:
        violations.append(f"channel index out of range: {int(inst.channels[index])}")
    for index in bad_voters[:10]:
        violations.append(f"voter index out of range: {int(inst.voters[index])}")

    if inst.num_edges and bad_channels.size == 0 and bad_voters.size == 0:
        keys = inst.channels * max(n, 1) + inst.voters
        unique, counts = np.unique(keys, return_counts=True)
        for key in unique[counts > 1][:10]:
            violations.append(f"duplicate edge ({int(key // n)}, {int(key % n)})")

    m_real = inst.num_real_channels
    if not 1 <= inst.attacker_budget <= max(m_real, 0):
        violations.append(
            f"attacker budget {inst.attacker_budget} outside [1, {m_real}]"
        )
    if not 1 <= inst.defender_budget <= max(m_real, 0):
        violations.append(
            f"defender budget {inst.defender_budget} outside [1, {m_real}]"
        )
    if inst.num_pseudo_channels not in (0, n):
        violations.append(
            f"extended instances need one pseudo-channel per voter, "
            f"got {inst.num_pseudo_channels} for {n} voters"
        )
    if not 0 <= inst.flip_budget <= n:
        violations.append(f"flip budget {inst.flip_budget} outside [0, {n}]")

    disjoint = inst.is_disjoint if not bad_voters.size else False
    return ValidationReport(violations=violations, disjoint=disjoint)


class PreferenceKind(Enum):
    """Kinds of voter-preference knowledge"""

    KNOWN = "known"
    MARGINALS = "marginals"
    SAMPLES = "samples"
    ADVERSARIAL = "adversarial"


def _bits(values, label: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != 1 or not np.all((array == 0.0) | (array == 1.0)):
        raise DomainError(f"{label} must be a vector of 0/1 bits")
    return _frozen(array)


@dataclass(frozen=True, eq=False)
class KnownPreferences:
    """Both players know every voter's preference bit"""

    theta: np.ndarray
    kind: PreferenceKind = field(default=PreferenceKind.KNOWN, init=False)

    def __post_init__(self):
        object.__setattr__(self, "theta", _bits(self.theta, "theta"))

    @property
    def num_voters(self) -> int:
        return int(self.theta.shape[0])


@dataclass(frozen=True, eq=False)
class MarginalPreferences:
    """Shared Bernoulli prior Pr[theta_v = 1] per voter"""

    probabilities: np.ndarray
    kind: PreferenceKind = field(default=PreferenceKind.MARGINALS, init=False)

    def __post_init__(self):
        probabilities = np.array(self.probabilities, dtype=float)
        if probabilities.ndim != 1 or not np.all((probabilities >= 0) & (probabilities <= 1)):
            raise DomainError("marginal probabilities must lie in [0, 1]")
        object.__setattr__(self, "probabilities", _frozen(probabilities))

    @property
    def num_voters(self) -> int:
        return int(self.probabilities.shape[0])


@dataclass(frozen=True, eq=False)
class SampledPreferences:
    """I.i.d. preference draws; the attacker observes the realized draw"""

    samples: np.ndarray
    kind: PreferenceKind = field(default=PreferenceKind.SAMPLES, init=False)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 2 or samples.shape[0] < 1:
            raise DomainError("samples must be a nonempty list of equal-length bit vectors")
        if not np.all((samples == 0.0) | (samples == 1.0)):
            raise DomainError("samples must contain only 0/1 bits")
        object.__setattr__(self, "samples", _frozen(samples))

    @property
    def num_voters(self) -> int:
        return int(self.samples.shape[1])

    @property
    def num_samples(self) -> int:
        return int(self.samples.shape[0])


@dataclass(frozen=True, eq=False)
class AdversarialPreferences:
    """Nominal profile that an adversary may flip in up to ``radius`` places"""

    nominal: np.ndarray
    radius: int
    kind: PreferenceKind = field(default=PreferenceKind.ADVERSARIAL, init=False)

    def __post_init__(self):
        nominal = _bits(self.nominal, "nominal theta")
        object.__setattr__(self, "nominal", nominal)
        if not 0 <= int(self.radius) <= nominal.shape[0]:
            raise DomainError(f"flip radius {self.radius} outside [0, {nominal.shape[0]}]")
        object.__setattr__(self, "radius", int(self.radius))

    @property
    def num_voters(self) -> int:
        return int(self.nominal.shape[0])


PreferenceModel = Union[
    KnownPreferences, MarginalPreferences, SampledPreferences, AdversarialPreferences
]


@dataclass(frozen=True)
class PureStrategy:
    """A set of channels, stored as a strictly increasing tuple"""

    channels: Tuple[int, ...] = ()

    def __post_init__(self):
        channels = tuple(int(u) for u in self.channels)
        if any(b <= a for a, b in zip(channels, channels[1:])):
            ordered = tuple(sorted(channels))
            if len(set(ordered)) != len(ordered):
                raise InvalidStrategyError(f"duplicate channels in strategy {channels}")
            channels = ordered
        object.__setattr__(self, "channels", channels)

    @classmethod
    def of(cls, channels: Iterable[int]) -> "PureStrategy":
        return cls(tuple(channels))

    def __len__(self) -> int:
        return len(self.channels)

    def __iter__(self):
        return iter(self.channels)

    def __contains__(self, channel) -> bool:
        return channel in self.channels

    def as_array(self) -> np.ndarray:
        return np.asarray(self.channels, dtype=np.int64)

    def __str__(self) -> str:
        return "{" + ", ".join(str(u) for u in self.channels) + "}"


def check_pure_strategy(
    inst: GameInstance,
    strategy: PureStrategy,
    side: str = "attacker",
    enforce_budget: bool = True,
) -> None:
    """Raise InvalidStrategyError unless the strategy is feasible for a side.

    The defender picks at most k_d real channels. The attacker picks at most k_a
    real channels and, on extended instances, at most the flip budget of
    pseudo-channels. Evaluators skip the budget part so that expanded-budget
    defenses can be scored.
    """
    m_real = inst.num_real_channels
    if strategy.channels:
        if strategy.channels[0] < 0 or strategy.channels[-1] >= inst.num_channels:
            raise InvalidStrategyError(
                f"channel index out of range in {strategy} (m={inst.num_channels})"
            )
    real = sum(1 for u in strategy.channels if u < m_real)
    pseudo = len(strategy) - real
    if side not in ("defender", "attacker"):
        raise ValueError(f"Unknown side: {side}")
    if side == "defender" and pseudo:
        raise InvalidStrategyError(f"defender cannot select pseudo-channels: {strategy}")
    if not enforce_budget:
        return
    if side == "defender":
        if real > inst.defender_budget:
            raise InvalidStrategyError(
                f"defender strategy {strategy} exceeds budget {inst.defender_budget}"
            )
    else:
        if real > inst.attacker_budget:
            raise InvalidStrategyError(
                f"attacker strategy {strategy} exceeds budget {inst.attacker_budget}"
            )
        if pseudo > inst.flip_budget:
            raise InvalidStrategyError(
                f"attacker strategy {strategy} exceeds flip budget {inst.flip_budget}"
            )


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    """Finitely supported distribution over pure strategies"""

    support: Tuple[PureStrategy, ...]
    weights: np.ndarray

    def __post_init__(self):
        support = tuple(self.support)
        weights = np.array(self.weights, dtype=float)
        if not support:
            raise InvalidStrategyError("mixed strategy support is empty")
        if weights.shape != (len(support),):
            raise InvalidStrategyError(
                f"{weights.shape[0] if weights.ndim else 0} weights for {len(support)} strategies"
            )
        if np.any(weights < 0) or abs(float(weights.sum()) - 1.0) > MASS_TOLERANCE:
            raise InvalidStrategyError("mixture weights must be nonnegative and sum to 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", _frozen(weights))

    @classmethod
    def point(cls, strategy: PureStrategy) -> "MixedStrategy":
        return cls((strategy,), np.ones(1))

    @classmethod
    def uniform(cls, history: Sequence[PureStrategy]) -> "MixedStrategy":
        """Empirical distribution of a play history.

        Repeated strategies are merged in order of first appearance.
        """
        if not history:
            raise InvalidStrategyError("cannot build a mixture from an empty history")
        counts: "OrderedDict[PureStrategy, int]" = OrderedDict()
        for strategy in history:
            counts[strategy] = counts.get(strategy, 0) + 1
        total = float(len(history))
        return cls(
            tuple(counts.keys()), np.array([count / total for count in counts.values()])
        )

    def items(self) -> Iterable[Tuple[PureStrategy, float]]:
        return zip(self.support, (float(w) for w in self.weights))

    def __len__(self) -> int:
        return len(self.support)

    def to_dict(self) -> Dict[str, list]:
        return {
            "support": [list(s.channels) for s in self.support],
            "weights": [float(w) for w in self.weights],
        }


@dataclass(frozen=True, eq=False)
class MarginalVector:
    """Fractional attacker strategy: inclusion probability per channel.

    On extended instances the last ``num_pseudo`` coordinates form a second block
    whose mass is bounded by ``flip_budget``.
    """

    values: np.ndarray
    budget: float
    flip_budget: float = 0.0
    num_pseudo: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise DomainError("marginal vector must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise DomainError("marginal vector has non-finite entries")
        if np.any(values < -MASS_TOLERANCE) or np.any(values > 1.0 + MASS_TOLERANCE):
            raise DomainError("marginal entries must lie in [0, 1]")
        split = values.shape[0] - int(self.num_pseudo)
        if split < 0:
            raise DomainError("pseudo block larger than the vector")
        if values[:split].sum() > self.budget + MASS_TOLERANCE:
            raise DomainError(
                f"marginal mass {values[:split].sum():.6g} exceeds budget {self.budget}"
            )
        if values[split:].sum() > self.flip_budget + MASS_TOLERANCE:
            raise DomainError(
                f"pseudo mass {values[split:].sum():.6g} exceeds flip budget {self.flip_budget}"
            )
        object.__setattr__(self, "values", _frozen(values))

    @property
    def dimension(self) -> int:
        return int(self.values.shape[0])

    @classmethod
    def indicator(cls, inst: GameInstance, strategy: PureStrategy) -> "MarginalVector":
        """The vertex of the marginal polytope for a pure attacker strategy"""
        values = np.zeros(inst.num_channels)
        values[strategy.as_array()] = 1.0
        return cls(
            values,
            budget=float(inst.attacker_budget),
            flip_budget=float(inst.flip_budget),
            num_pseudo=inst.num_pseudo_channels,
        )
