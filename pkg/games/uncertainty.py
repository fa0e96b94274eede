"""
Preference Uncertainty Reductions

Turns each voter-preference model into something the evaluators understand:
known bits and Bernoulli marginals become weight vectors, sampled profiles are
drawn from marginals, and the adversarial flip model becomes an extended
instance with one pseudo-channel per voter.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DomainError, StructureError
from .game_model import (
    AdversarialPreferences,
    GameInstance,
    KnownPreferences,
    MarginalPreferences,
    PreferenceModel,
    SampledPreferences,
)

logger = logging.getLogger(__name__)


def _check_length(inst: GameInstance, model: PreferenceModel) -> None:
    if model.num_voters != inst.num_voters:
        raise StructureError(
            f"preference model covers {model.num_voters} voters, instance has {inst.num_voters}"
        )


def substitute_marginals(inst: GameInstance, model: PreferenceModel) -> np.ndarray:
    """Effective voter weights w_v = Pr[theta_v = 1].

    Known bits are passed through unchanged, so a Known model and a Marginals
    model with the same 0/1 entries give identical weights.
    """
    _check_length(inst, model)
    if isinstance(model, MarginalPreferences):
        return np.array(model.probabilities, dtype=float)
    if isinstance(model, KnownPreferences):
        return np.array(model.theta, dtype=float)
    raise DomainError(f"cannot substitute marginals for a {model.kind.value} model")


def preference_weights(inst: GameInstance, model: PreferenceModel) -> np.ndarray:
    """Single weight vector for a model: theta, marginals, nominal, or sample mean"""
    _check_length(inst, model)
    if isinstance(model, AdversarialPreferences):
        return np.array(model.nominal, dtype=float)
    if isinstance(model, SampledPreferences):
        return model.samples.mean(axis=0)
    return substitute_marginals(inst, model)


def draw_preference_samples(
    model: PreferenceModel, num_samples: int, seed: int
) -> SampledPreferences:
    """Draw i.i.d. preference profiles from a model.

    Marginals are sampled as independent Bernoulli bits; known and adversarial
    nominal profiles are repeated.
    """
    if num_samples < 1:
        raise DomainError(f"need at least one sample, got {num_samples}")
    if isinstance(model, SampledPreferences):
        return model
    if isinstance(model, MarginalPreferences):
        rng = np.random.default_rng(seed)
        draws = rng.random((num_samples, model.num_voters)) < model.probabilities
        return SampledPreferences(draws.astype(float))
    base = model.theta if isinstance(model, KnownPreferences) else model.nominal
    return SampledPreferences(np.tile(base, (num_samples, 1)))


@dataclass(frozen=True, eq=False)
class AdversarialExtension:
    """Extended instance plus the weights and partition budgets it is played with"""

    instance: GameInstance
    weights: np.ndarray

    @property
    def budgets(self) -> Tuple[int, int]:
        return self.instance.attacker_budget, self.instance.flip_budget

    @property
    def num_real_channels(self) -> int:
        return self.instance.num_real_channels


def adversarial_extend(inst: GameInstance, theta_hat, flip_budget: int) -> AdversarialExtension:
    """Add a pseudo-channel per voter so preference flips become attacks.

    Pseudo-channel m + v has one edge to voter v with p = 1 and q = 0. Attacking
    it reaches v with certainty and counts v with weight 1 even when its nominal
    bit is 0. The attacker may pick at most k_a real channels and at most
    ``flip_budget`` pseudo-channels.
    """
    if inst.is_extended:
        raise StructureError("instance is already extended")
    theta_hat = np.asarray(theta_hat, dtype=float)
    if theta_hat.shape != (inst.num_voters,):
        raise StructureError(
            f"nominal profile has {theta_hat.shape[0]} entries, instance has "
            f"{inst.num_voters} voters"
        )
    if not np.all((theta_hat == 0.0) | (theta_hat == 1.0)):
        raise DomainError("nominal profile must contain 0/1 bits")
    if not 0 <= flip_budget <= inst.num_voters:
        raise DomainError(f"flip budget {flip_budget} outside [0, {inst.num_voters}]")

    m, n = inst.num_channels, inst.num_voters
    voters = np.arange(n, dtype=np.int64)
    extended = GameInstance(
        num_channels=m + n,
        num_voters=n,
        channels=np.concatenate([inst.channels, m + voters]),
        voters=np.concatenate([inst.voters, voters]),
        p=np.concatenate([inst.p, np.ones(n)]),
        q=np.concatenate([inst.q, np.zeros(n)]),
        attacker_budget=inst.attacker_budget,
        defender_budget=inst.defender_budget,
        num_pseudo_channels=n,
        flip_budget=int(flip_budget),
    )
    logger.debug("Extended %s with %d pseudo-channels, flip budget %d", inst, n, flip_budget)
    return AdversarialExtension(instance=extended, weights=theta_hat.copy())
