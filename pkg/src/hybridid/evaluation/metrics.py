"""Prediction-accuracy and comfort metrics."""
from dataclasses import asdict, dataclass, field

import numpy as np

from ..exceptions import DomainError, ShapeError

STEPS_PER_DAY = 144
T_TARGET = 23.0
T_HOT = 26.0
T_COLD = 20.0


def mae(predicted, observed):
    """Per-channel mean absolute error over all leading axes."""
    p = np.asarray(predicted, dtype=float)
    o = np.asarray(observed, dtype=float)
    if p.shape != o.shape:
        raise ShapeError(f"predicted {p.shape} and observed {o.shape} differ")
    if p.size == 0:
        raise DomainError("empty series")
    d = np.abs(p - o)
    return d.reshape(-1, d.shape[-1]).mean(axis=0) if d.ndim > 1 else float(d.mean())


def delta1(x_hat, y_hat):
    """Mean distance of ``(x_hat, y_hat)`` from the unit circle."""
    x = np.asarray(x_hat, dtype=float)
    y = np.asarray(y_hat, dtype=float)
    if x.shape != y.shape:
        raise ShapeError("x and y series must be aligned")
    return float(np.mean(np.abs(np.hypot(x, y) - 1.0)))


def comfort_metrics(t_rooms, steps_per_day=STEPS_PER_DAY):
    """``(Mdev, N_hot, N_cold)`` for temperatures of shape (steps, rooms).

    ``DEV(t) = sum_rooms |T - 23|``; Mdev averages its daily maximum.
    A room-day counts towards ``N_hot`` (``N_cold``) when any step of that
    day is above 26 (below 20).
    """
    t = np.asarray(t_rooms, dtype=float)
    if t.ndim == 1:
        t = t[:, None]
    if len(t) == 0 or len(t) % steps_per_day:
        raise DomainError(f"period must be a positive multiple of {steps_per_day} steps")
    days = t.reshape(-1, steps_per_day, t.shape[1])
    dev = np.abs(days - T_TARGET).sum(axis=2)
    m_dev = float(dev.max(axis=1).mean())
    n_hot = int(np.sum(np.any(days > T_HOT, axis=1)))
    n_cold = int(np.sum(np.any(days < T_COLD, axis=1)))
    return m_dev, n_hot, n_cold


@dataclass
class MetricReport:
    controller: str
    model: str
    m_dev: float
    cooling_energy: float
    heating_energy: float
    n_hot: int
    n_cold: int
    n_days: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = (self.m_dev, self.cooling_energy, self.heating_energy, self.n_hot, self.n_cold)
        if min(vals) < 0:
            raise DomainError("metrics must be >= 0")

    @property
    def total_energy(self):
        return self.cooling_energy + self.heating_energy

    def row(self):
        d = asdict(self)
        d.pop("extra")
        return d
