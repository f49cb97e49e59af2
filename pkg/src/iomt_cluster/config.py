"""Run configuration: dataclasses, named presets, YAML files and ``SIM_``
environment overrides.

Environment variables map onto config keys: ``SIM_SELECTOR=pso`` sets a
top-level key, ``SIM_NETWORK__NODE_COUNT=50`` a nested one (double
underscore separates sections). Values are parsed as YAML scalars.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field

import yaml

from .baselines import PsoConfig
from .cso import SwarmConfig
from .errors import ConfigError
from .network import NetworkConfig, RadioEnergyModel
from .objectives import MODES, FitnessWeights
from .selection import RANK_ORDERS, SELECTORS

ENV_PREFIX = "SIM_"
AGGREGATE_MODES = ("single", "sum")


@dataclass
class FitnessConfig:
    weights: FitnessWeights = field(default_factory=FitnessWeights)
    mode: str = "residual"

    def __post_init__(self):
        self.weights = FitnessWeights.of(self.weights)
        if self.mode not in MODES:
            raise ConfigError(f"fitness.mode must be one of {MODES}, got {self.mode!r}")


@dataclass
class SimulationConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    fitness: FitnessConfig = field(default_factory=FitnessConfig)
    swarm: SwarmConfig = field(default_factory=SwarmConfig)
    pso: PsoConfig = field(default_factory=PsoConfig)
    selector: str = "cso"
    sleep_probability: float = 0.0
    election_period: int = 1
    packets_per_round: int = 1
    aggregate_output: str = "single"  # "sum": CH forwards every received bit
    tx_power_dbm: float | None = None  # None: the default transmit power
    rank_order: str = "id"  # how swarm coordinates map onto pool nodes

    def validate(self) -> "SimulationConfig":
        try:
            return self._validate()
        except TypeError as exc:
            raise ConfigError(f"config value has the wrong type: {exc}") from exc

    def _validate(self) -> "SimulationConfig":
        self.network.validate()
        self.swarm.validate()
        self.pso.validate()
        if self.selector not in SELECTORS:
            raise ConfigError(f"selector must be one of {SELECTORS}, got {self.selector!r}")
        if not 0.0 <= self.sleep_probability <= 1.0:
            raise ConfigError("sleep_probability must lie in [0, 1]")
        if self.election_period < 1:
            raise ConfigError("election_period must be >= 1")
        if self.packets_per_round < 1:
            raise ConfigError("packets_per_round must be >= 1")
        if self.aggregate_output not in AGGREGATE_MODES:
            raise ConfigError(f"aggregate_output must be one of {AGGREGATE_MODES}")
        if self.rank_order not in RANK_ORDERS:
            raise ConfigError(f"rank_order must be one of {RANK_ORDERS}")
        if self.tx_power_dbm is not None and not (-40.0 <= self.tx_power_dbm <= 20.0):
            raise ConfigError("tx_power_dbm must lie in [-40, 20]")
        return self

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def full_scale() -> SimulationConfig:
    """Full-scale network table: 1000 nodes, 500 rounds."""
    return SimulationConfig()


def desk() -> SimulationConfig:
    """Shrunk profile for quick runs: 100 nodes, 100 rounds."""
    return SimulationConfig(network=NetworkConfig(node_count=100, max_rounds=100))


PRESETS = {"desk": desk, "full-scale": full_scale}


def preset(name: str) -> SimulationConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


_NESTED = {
    (SimulationConfig, "network"): NetworkConfig,
    (SimulationConfig, "fitness"): FitnessConfig,
    (SimulationConfig, "swarm"): SwarmConfig,
    (SimulationConfig, "pso"): PsoConfig,
    (NetworkConfig, "radio"): RadioEnergyModel,
}


def _merge(obj, updates: dict, where: str = ""):
    """Return a copy of dataclass ``obj`` with ``updates`` applied recursively."""
    if not isinstance(updates, dict):
        raise ConfigError(f"section {where or '<root>'} must be a mapping")
    names = {f.name for f in dataclasses.fields(obj)}
    changes = {}
    for key, value in updates.items():
        if key not in names:
            raise ConfigError(f"unknown config key {where + key!r}")
        sub = _NESTED.get((type(obj), key))
        if sub is not None:
            if not isinstance(value, dict):
                raise ConfigError(f"section {where + key!r} must be a mapping")
            changes[key] = _merge(getattr(obj, key), value, f"{where}{key}.")
        elif key == "weights" and isinstance(value, dict):
            changes[key] = FitnessWeights(**value)
        else:
            changes[key] = value
    try:
        return dataclasses.replace(obj, **changes)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid value in section {where or '<root>'}: {exc}") from exc


def apply_overrides(config: SimulationConfig, updates: dict) -> SimulationConfig:
    return _merge(config, updates)


def env_overrides(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    out: dict = {}
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        path = [p.lower() for p in name[len(ENV_PREFIX):].split("__")]
        node = out
        for part in path[:-1]:
            node = node.setdefault(part, {})
        node[path[-1]] = yaml.safe_load(raw)
    return out


def load_config(path=None, *, preset_name: str | None = None, environ=None) -> SimulationConfig:
    """Start from a preset (file key ``preset`` or ``preset_name``, default
    ``desk``), apply the YAML file, then environment overrides."""
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must be a mapping")
    data = dict(data)
    name = data.pop("preset", None) or preset_name or "desk"
    config = preset(name)
    config = _merge(config, data)
    env = env_overrides(environ)
    if env:
        config = _merge(config, env)
    return config.validate()


def dump_config(config: SimulationConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False)


__all__ = [
    "FitnessConfig",
    "SimulationConfig",
    "PRESETS",
    "preset",
    "desk",
    "full_scale",
    "load_config",
    "apply_overrides",
    "env_overrides",
    "dump_config",
]
