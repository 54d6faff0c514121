"""Ensembles of retrained models with a declared held-out split."""
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..exceptions import DomainError, PartialResultError
from .retrain import RetrainConfig, retrain

log = logging.getLogger(__name__)

MANIFEST_NAME = "ensemble.json"


@dataclass(frozen=True)
class EnsembleSpec:
    """``configs`` yields one member each; ``held_out`` lists member indices
    kept aside for evaluation (defaults to the last ``K``)."""
    configs: tuple
    n_held_out: int = 2
    held_out: tuple = None

    def __post_init__(self):
        N, K = len(self.configs), self.n_held_out
        if not 1 <= K < N:
            raise DomainError(f"need 1 <= K < N, got K={K}, N={N}")
        if self.held_out is not None:
            idx = sorted(set(self.held_out))
            if len(idx) != K or idx[0] < 0 or idx[-1] >= N:
                raise DomainError(f"held_out must list {K} distinct indices in [0, {N})")

    @property
    def held_out_indices(self):
        if self.held_out is not None:
            return tuple(sorted(self.held_out))
        N = len(self.configs)
        return tuple(range(N - self.n_held_out, N))


@dataclass
class Ensemble:
    train: list
    held_out: list
    members: list = field(default_factory=list)

    def manifest(self):
        return {"n_members": len(self.members), "members": self.members}


def build_ensemble(stage1, hist, spec, stopping_set):
    """Retrain one model per config; returns an ``Ensemble``.

    Members that fail are collected and reported together after every
    config was tried.
    """
    held = set(spec.held_out_indices)
    train, held_out, members, failed = [], [], [], []
    completed = []
    for k, cfg in enumerate(spec.configs):
        try:
            model, trace = retrain(stage1, hist, cfg, stopping_set)
        except Exception as exc:  # report every failing config at once
            log.warning("ensemble member %d failed: %s", k, exc)
            failed.append((k, cfg, exc))
            continue
        role = "held-out" if k in held else "train"
        (held_out if k in held else train).append(model)
        completed.append(model)
        members.append({"index": k, "role": role, "algorithm": cfg.algorithm,
                        "delta_max": cfg.delta_max, "n_max": cfg.n_max, "seed": cfg.seed,
                        "exit_reason": trace.exit_reason, "n_iter": trace.n_iter,
                        "final_delta": trace.final_delta})
    if failed:
        names = ", ".join(f"#{k} ({c.algorithm}, delta_max={c.delta_max}, n_max={c.n_max}): {e}"
                          for k, c, e in failed)
        raise PartialResultError(f"retraining failed for {names}", completed)
    return Ensemble(train, held_out, members)


def save_ensemble(ensemble, directory):
    """Write one checkpoint per member plus a JSON manifest; returns its path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    models = {}
    it_train, it_held = iter(ensemble.train), iter(ensemble.held_out)
    for m in ensemble.members:
        models[m["index"]] = next(it_held) if m["role"] == "held-out" else next(it_train)
    entries = []
    for m in ensemble.members:
        name = f"member_{m['index']:03d}.ckpt"
        models[m["index"]].save(directory / name)
        entries.append(dict(m, checkpoint=name))
    path = directory / MANIFEST_NAME
    path.write_text(json.dumps({"n_members": len(entries), "members": entries}, indent=2,
                               sort_keys=True))
    return path


def load_ensemble(manifest_path):
    from .reduced_model import ReducedModel
    manifest_path = Path(manifest_path)
    data = json.loads(manifest_path.read_text())
    train, held = [], []
    for m in data["members"]:
        model = ReducedModel.load(manifest_path.parent / m["checkpoint"])
        (held if m["role"] == "held-out" else train).append(model)
    return Ensemble(train, held, data["members"])


def config_from_dict(d):
    d = dict(d)
    return RetrainConfig(**d)


def config_to_dict(cfg):
    d = asdict(cfg)
    d.pop("schedule", None)
    return d
