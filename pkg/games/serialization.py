"""
JSON import/export for instances, preference models and mixed strategies.

Documents are written with sorted keys and a trailing newline so that the same
object always serializes to the same bytes.
"""

import dataclasses
import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Type, TypeVar, Union

import numpy as np

from .errors import ConfigError, GameError
from .game_model import (
    AdversarialPreferences,
    GameInstance,
    KnownPreferences,
    MarginalPreferences,
    MixedStrategy,
    PreferenceKind,
    PreferenceModel,
    PureStrategy,
    SampledPreferences,
)

INSTANCE_FORMAT = "election-defense/instance"
STRATEGY_FORMAT = "election-defense/mixed-strategy"
FORMAT_VERSION = 1

PathLike = Union[str, Path]
T = TypeVar("T")


def dumps(document: Dict[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def write_json(path: PathLike, document: Dict[str, Any]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(dumps(document), encoding="utf-8")


def read_json(path: PathLike) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read {path}: {e}") from e


def dataclass_from_dict(cls: Type[T], data: Dict[str, Any], section: str) -> T:
    """Build a config dataclass from a JSON section, rejecting unknown keys"""
    if not isinstance(data, dict):
        raise ConfigError(f"section '{section}' must be an object")
    known = {f.name for f in dataclasses.fields(cls) if f.init}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown keys in '{section}': {', '.join(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid '{section}' settings: {e}") from e


def _bits_list(values: np.ndarray) -> list:
    return [int(v) for v in values]


def preferences_to_dict(model: PreferenceModel) -> Dict[str, Any]:
    if isinstance(model, KnownPreferences):
        return {"kind": model.kind.value, "theta": _bits_list(model.theta)}
    if isinstance(model, MarginalPreferences):
        return {"kind": model.kind.value, "probabilities": [float(v) for v in model.probabilities]}
    if isinstance(model, SampledPreferences):
        return {"kind": model.kind.value, "samples": [_bits_list(row) for row in model.samples]}
    return {
        "kind": model.kind.value,
        "nominal": _bits_list(model.nominal),
        "radius": model.radius,
    }


def preferences_from_dict(data: Dict[str, Any]) -> PreferenceModel:
    try:
        kind = PreferenceKind(data["kind"])
        if kind is PreferenceKind.KNOWN:
            return KnownPreferences(np.array(data["theta"], dtype=float))
        if kind is PreferenceKind.MARGINALS:
            return MarginalPreferences(np.array(data["probabilities"], dtype=float))
        if kind is PreferenceKind.SAMPLES:
            return SampledPreferences(np.array(data["samples"], dtype=float))
        return AdversarialPreferences(np.array(data["nominal"], dtype=float), int(data["radius"]))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, GameError):
            raise
        raise ConfigError(f"Malformed preference block: {e}") from e


def instance_to_dict(
    inst: GameInstance, preferences: Optional[PreferenceModel] = None
) -> Dict[str, Any]:
    if inst.is_extended:
        raise ConfigError("extended instances are derived and not serialized")
    document: Dict[str, Any] = {
        "format": INSTANCE_FORMAT,
        "version": FORMAT_VERSION,
        "num_channels": inst.num_channels,
        "num_voters": inst.num_voters,
        "attacker_budget": inst.attacker_budget,
        "defender_budget": inst.defender_budget,
        "edges": [list(edge) for edge in inst.edge_list()],
    }
    if preferences is not None:
        document["preferences"] = preferences_to_dict(preferences)
    return document


def instance_from_dict(
    data: Dict[str, Any], validate: bool = True
) -> Tuple[GameInstance, Optional[PreferenceModel]]:
    if data.get("format") != INSTANCE_FORMAT:
        raise ConfigError(f"Not an instance document (format={data.get('format')!r})")
    try:
        inst = GameInstance.from_edges(
            num_channels=data["num_channels"],
            num_voters=data["num_voters"],
            edges=data["edges"],
            attacker_budget=data["attacker_budget"],
            defender_budget=data["defender_budget"],
            validate=validate,
        )
    except (KeyError, TypeError) as e:
        raise ConfigError(f"Malformed instance document: {e}") from e
    preferences = None
    if "preferences" in data:
        preferences = preferences_from_dict(data["preferences"])
    return inst, preferences


def save_instance(
    path: PathLike, inst: GameInstance, preferences: Optional[PreferenceModel] = None
) -> None:
    write_json(path, instance_to_dict(inst, preferences))


def load_instance(
    path: PathLike, validate: bool = True
) -> Tuple[GameInstance, Optional[PreferenceModel]]:
    return instance_from_dict(read_json(path), validate)


def strategy_to_dict(sigma: MixedStrategy) -> Dict[str, Any]:
    return {"format": STRATEGY_FORMAT, "version": FORMAT_VERSION, **sigma.to_dict()}


def strategy_from_dict(data: Dict[str, Any]) -> MixedStrategy:
    try:
        support = tuple(PureStrategy(tuple(s)) for s in data["support"])
        return MixedStrategy(support, np.array(data["weights"], dtype=float))
    except (KeyError, TypeError) as e:
        raise ConfigError(f"Malformed strategy document: {e}") from e


def save_strategy(path: PathLike, sigma: MixedStrategy) -> None:
    write_json(path, strategy_to_dict(sigma))


def load_strategy(path: PathLike) -> MixedStrategy:
    data = read_json(path)
    if "defender" in data and "support" not in data:
        data = data["defender"]
    return strategy_from_dict(data)
