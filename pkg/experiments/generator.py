"""
Synthetic instance generation.

Mirrors the sampling recipe of the advertising experiments: each voter is
connected to a uniformly random subset of channels, propagation and
immunization probabilities are i.i.d. uniform in their ranges and preference
bits are i.i.d. Bernoulli.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from games.errors import ConfigError
from games.game_model import GameInstance, KnownPreferences, validate_instance

from .config import GeneratorConfig

logger = logging.getLogger(__name__)


def generate_instance(
    cfg: GeneratorConfig, seed: int, theta_probability: Optional[float] = None
) -> Tuple[GameInstance, KnownPreferences]:
    """Draw one instance and its preference bits.

    Args:
        cfg: Generator recipe
        seed: Seed for every random draw of this instance
        theta_probability: Override of the recipe's Bernoulli parameter

    Returns:
        (GameInstance, KnownPreferences)
    """
    cfg.validate()
    rng = np.random.default_rng(seed)
    m, n = cfg.num_channels, cfg.num_voters

    if cfg.disjoint:
        voters = np.arange(n, dtype=np.int64)
        channels = rng.integers(0, m, size=n, dtype=np.int64)
    else:
        if cfg.max_degree > m:
            raise ConfigError(f"voter degree {cfg.max_degree} exceeds the {m} channels")
        degrees = rng.integers(cfg.min_degree, cfg.max_degree + 1, size=n)
        voters = np.repeat(np.arange(n, dtype=np.int64), degrees)
        channels = np.concatenate(
            [np.sort(rng.choice(m, size=int(d), replace=False)) for d in degrees]
        ).astype(np.int64)

    num_edges = voters.shape[0]
    p = rng.uniform(cfg.p_range[0], cfg.p_range[1], size=num_edges)
    q = rng.uniform(cfg.q_range[0], cfg.q_range[1], size=num_edges)

    probability = cfg.theta_probability if theta_probability is None else theta_probability
    if cfg.theta_recipe == "ones":
        theta = np.ones(n)
    else:
        theta = (rng.random(n) < probability).astype(float)

    instance = GameInstance(
        num_channels=m,
        num_voters=n,
        channels=channels,
        voters=voters,
        p=p,
        q=q,
        attacker_budget=cfg.attacker_budget,
        defender_budget=cfg.defender_budget,
    )
    report = validate_instance(instance)
    if not report.ok:
        raise ConfigError(f"generator produced an invalid instance: {report.violations[0]}")
    logger.debug("Generated %s with %d edges (seed %d)", instance, num_edges, seed)
    return instance, KnownPreferences(theta)
