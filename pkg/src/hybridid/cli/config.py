"""YAML experiment configuration.

One file per experiment. Top-level keys::

    system: pendulum            # or mini-building
    seed: 0                     # master seed, fanned out per stage
    output_dir: runs/pendulum   # relative paths resolve under $HYBRIDID_OUTPUT_ROOT
    seeds: 1                    # reproduce: number of consecutive master seeds
    experiment: {...}           # field overrides of the system's experiment dataclass
    retrain: [{...}, ...]       # retraining configs (one for the pendulum, the ensemble otherwise)
    ppo: {...}                  # PPO hyperparameters
    pendulum_ppo: {...}         # PPO sanity run on the pendulum (reproduce pendulum only)

``system``, ``seed`` and ``output_dir`` are required.
"""
import copy
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from ..exceptions import ConfigError
from ..experiments.building import BuildingExperiment
from ..experiments.pendulum import PendulumExperiment
from ..rl.ppo import PpoConfig
from ..sysid.ensemble import config_from_dict, config_to_dict

OUTPUT_ROOT_ENV = "HYBRIDID_OUTPUT_ROOT"
SYSTEMS = ("pendulum", "mini-building")
REQUIRED = ("system", "seed", "output_dir")
STAGES = ("simulate", "train-sim", "retrain", "identify-baseline", "train-ppo", "evaluate")


@dataclass
class ExperimentConfig:
    system: str
    seed: int
    output_dir: str
    seeds: int = 1
    experiment: dict = field(default_factory=dict)
    retrain: list = field(default_factory=list)
    ppo: dict = field(default_factory=dict)
    pendulum_ppo: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ConfigError(f"system must be one of {SYSTEMS}, got {self.system!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError("seed must be an integer")
        if not isinstance(self.seeds, int) or self.seeds < 1:
            raise ConfigError("seeds must be a positive integer")
        for name in ("experiment", "ppo", "pendulum_ppo"):
            if not isinstance(getattr(self, name), dict):
                raise ConfigError(f"{name} must be a mapping")
        if not isinstance(self.retrain, list):
            raise ConfigError("retrain must be a list of mappings")

    # -- resolution ------------------------------------------------------------
    @property
    def output_path(self):
        path = Path(self.output_dir)
        root = os.environ.get(OUTPUT_ROOT_ENV)
        return path if path.is_absolute() or not root else Path(root) / path

    def experiment_for(self, seed=None):
        """The system's experiment dataclass with every override applied."""
        cls = PendulumExperiment if self.system == "pendulum" else BuildingExperiment
        known = {f.name for f in fields(cls)}
        unknown = set(self.experiment) - known
        if unknown:
            raise ConfigError(f"unknown experiment keys: {sorted(unknown)}")
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in self.experiment.items()}
        kw["seed"] = self.seed if seed is None else seed
        try:
            exp = cls(**kw)
            if self.retrain:
                cfgs = tuple(config_from_dict(d) for d in self.retrain)
                exp = replace(exp, retrain=cfgs[0]) if self.system == "pendulum" else \
                    replace(exp, members=cfgs)
            if self.ppo and self.system == "mini-building":
                exp = replace(exp, ppo=PpoConfig(**{**asdict(exp.ppo), **self.ppo}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid experiment settings: {exc}") from exc
        return exp

    def pendulum_ppo_config(self):
        base = dict(n_workers=4, n_iterations=150)
        given = {k: v for k, v in self.pendulum_ppo.items() if k != "enabled"}
        try:
            return PpoConfig(**{**base, **given})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid pendulum_ppo settings: {exc}") from exc

    # -- (de)serialization -------------------------------------------------------
    def to_dict(self):
        return copy.deepcopy(asdict(self))

    def dump(self, path):
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=True))

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping")
        for key in REQUIRED:
            if key not in data:
                raise ConfigError(f"missing required config key {key!r}")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**copy.deepcopy(data))


def _set_path(data, dotted, value):
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot override {dotted!r}: {k!r} is not a mapping")
    node[keys[-1]] = value


def load_config(path, overrides=()):
    """Parse ``path`` and apply ``key.sub=value`` overrides (values parsed as YAML)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value")
        key, raw = item.split("=", 1)
        _set_path(data, key.strip(), yaml.safe_load(raw))
    return ExperimentConfig.from_dict(data)


def default_config(system, output_dir=None, seed=0):
    """Pinned defaults used by ``reproduce``."""
    if system == "pendulum":
        return ExperimentConfig("pendulum", seed, output_dir or "pendulum", seeds=5)
    if system in ("building-desk", "mini-building"):
        return ExperimentConfig("mini-building", seed, output_dir or "building-desk")
    raise ConfigError(f"unknown experiment id {system!r}")


def retrain_dicts(configs):
    return [config_to_dict(c) for c in configs]
