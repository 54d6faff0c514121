"""Aligned command / exogenous / observation sequences and their CSV form."""
import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..exceptions import DomainError, ShapeError


def _as_rows(a, n):
    a = np.asarray(a, dtype=np.float64)
    return a if a.ndim == 2 else a.reshape(n, -1)


@dataclass
class EpisodeDataset:
    """One or more episodes of equal-rate samples stored back to back.

    ``commands`` (N, d_I), ``exogenous`` (N, d_E) and ``observations``
    (N, d_O) are row-aligned: ``observations[t]`` is what the system shows
    after ``commands[t]`` has been applied under ``exogenous[t]``.
    ``episode_starts`` lists the row index where each episode begins;
    training windows never straddle two episodes.
    """
    commands: np.ndarray
    exogenous: np.ndarray
    observations: np.ndarray
    dt: float = 1.0
    command_names: list = None
    exogenous_names: list = None
    observation_names: list = None
    episode_starts: np.ndarray = None
    seed: object = None
    description: str = ""
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.observations)
        if not (len(self.commands) == len(self.exogenous) == n):
            raise ShapeError(f"misaligned inputs: {len(self.commands)} commands, "
                             f"{len(self.exogenous)} exogenous, {n} observations")
        self.commands = _as_rows(self.commands, n)
        self.exogenous = _as_rows(self.exogenous, n)
        self.observations = _as_rows(self.observations, n)
        if self.command_names is None:
            self.command_names = [f"u{k}" for k in range(self.d_I)]
        if self.exogenous_names is None:
            self.exogenous_names = [f"e{k}" for k in range(self.d_E)]
        if self.observation_names is None:
            self.observation_names = [f"o{k}" for k in range(self.d_O)]
        if self.episode_starts is None:
            self.episode_starts = np.array([0], dtype=np.int64)
        self.episode_starts = np.asarray(self.episode_starts, dtype=np.int64)
        if len(self.command_names) != self.d_I or len(self.exogenous_names) != self.d_E \
                or len(self.observation_names) != self.d_O:
            raise ShapeError("column name count does not match data width")

    def __len__(self):
        return len(self.observations)

    @property
    def d_I(self):
        return self.commands.shape[1]

    @property
    def d_E(self):
        return self.exogenous.shape[1]

    @property
    def d_O(self):
        return self.observations.shape[1]

    @property
    def x(self):
        """Full per-step vector (commands, exogenous, observations), width d."""
        return np.concatenate([self.commands, self.exogenous, self.observations], axis=1)

    @property
    def x_sharp(self):
        """Commands and exogenous inputs only, width d - d_O."""
        return np.concatenate([self.commands, self.exogenous], axis=1)

    def episode_bounds(self):
        ends = list(self.episode_starts[1:]) + [len(self)]
        return list(zip(self.episode_starts.tolist(), [int(e) for e in ends]))

    def valid_starts(self, window):
        """Start indices of every ``window``-long slice inside a single episode."""
        starts = [np.arange(a, b - window + 1) for a, b in self.episode_bounds() if b - a >= window]
        if not starts:
            raise DomainError(f"no episode is long enough for a window of {window} steps")
        return np.concatenate(starts)

    def slice(self, start, stop):
        starts = self.episode_starts[(self.episode_starts > start) & (self.episode_starts < stop)]
        return EpisodeDataset(
            self.commands[start:stop], self.exogenous[start:stop], self.observations[start:stop],
            dt=self.dt, command_names=list(self.command_names),
            exogenous_names=list(self.exogenous_names),
            observation_names=list(self.observation_names),
            episode_starts=np.concatenate([[0], starts - start]), seed=self.seed,
            description=self.description)

    @classmethod
    def concatenate(cls, parts, description=""):
        starts, offset = [], 0
        for p in parts:
            starts.extend((p.episode_starts + offset).tolist())
            offset += len(p)
        first = parts[0]
        return cls(np.concatenate([p.commands for p in parts]),
                   np.concatenate([p.exogenous for p in parts]),
                   np.concatenate([p.observations for p in parts]),
                   dt=first.dt, command_names=list(first.command_names),
                   exogenous_names=list(first.exogenous_names),
                   observation_names=list(first.observation_names),
                   episode_starts=np.array(starts), seed=first.seed,
                   description=description or first.description)

    # -- files -----------------------------------------------------------------
    def columns(self):
        return (["t"] + [f"cmd_{n}" for n in self.command_names]
                + [f"ext_{n}" for n in self.exogenous_names]
                + [f"obs_{n}" for n in self.observation_names])

    def metadata(self):
        return {
            "dt": self.dt,
            "d_I": self.d_I, "d_E": self.d_E, "d_O": self.d_O,
            "seed": self.seed,
            "description": self.description,
            "episode_starts": self.episode_starts.tolist(),
            "n_rows": len(self),
        }

    def to_csv(self, path):
        """Write ``path`` plus a ``<path>.meta.json`` sidecar."""
        path = Path(path)
        t = np.arange(len(self), dtype=np.float64) * self.dt
        table = np.column_stack([t, self.commands, self.exogenous, self.observations])
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns())
            for row in table:
                writer.writerow([repr(float(v)) for v in row])
        with open(sidecar_path(path), "w") as fh:
            json.dump(self.metadata(), fh, indent=2, sort_keys=True)

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        with open(sidecar_path(path)) as fh:
            meta = json.load(fh)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [[float(v) for v in row] for row in reader]
        table = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
        d_I, d_E = meta["d_I"], meta["d_E"]
        names = header[1:]
        strip = lambda cols, pre: [c[len(pre):] for c in cols]  # noqa: E731
        return cls(table[:, 1:1 + d_I], table[:, 1 + d_I:1 + d_I + d_E], table[:, 1 + d_I + d_E:],
                   dt=meta["dt"],
                   command_names=strip(names[:d_I], "cmd_"),
                   exogenous_names=strip(names[d_I:d_I + d_E], "ext_"),
                   observation_names=strip(names[d_I + d_E:], "obs_"),
                   episode_starts=np.array(meta["episode_starts"]), seed=meta.get("seed"),
                   description=meta.get("description", ""))


def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.name + ".meta.json")
