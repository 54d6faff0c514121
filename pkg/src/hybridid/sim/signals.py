"""Excitation signals: sinusoid, square wave and random staircase."""
from dataclasses import dataclass

import numpy as np

from ..exceptions import DomainError

SHAPES = ("sinusoid", "square", "piecewise-constant-random")


@dataclass(frozen=True)
class SignalSpec:
    """Excitation description.

    For ``sinusoid`` and ``square`` the amplitude range bounds the magnitude
    of the wave; for ``piecewise-constant-random`` it bounds the level
    itself. ``period_range`` is in steps; square waves and staircases draw a
    fresh period (and amplitude) for every cycle / level.
    """
    shape: str = "piecewise-constant-random"
    amplitude_range: tuple = (-2.0, 2.0)
    period_range: tuple = (20, 200)
    seed: int = 0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise DomainError(f"unknown signal shape {self.shape!r}")
        a_min, a_max = self.amplitude_range
        if a_min > a_max:
            raise DomainError("amplitude range must satisfy a_min <= a_max")
        p_min, p_max = self.period_range
        if p_min < 2 or p_min > p_max:
            raise DomainError("period range must satisfy 2 <= p_min <= p_max")


def _period(rng, spec):
    p_min, p_max = spec.period_range
    return int(rng.integers(p_min, p_max + 1))


def gen_signal(spec, n_steps):
    if n_steps <= 0:
        raise DomainError("n_steps must be > 0")
    rng = np.random.default_rng(spec.seed)
    a_min, a_max = spec.amplitude_range
    out = np.empty(n_steps)
    if spec.shape == "sinusoid":
        amp = rng.uniform(a_min, a_max)
        period = rng.uniform(*spec.period_range)
        phase = rng.uniform(0.0, 2 * np.pi)
        return amp * np.sin(2 * np.pi * np.arange(n_steps) / period + phase)
    t = 0
    while t < n_steps:
        period = _period(rng, spec)
        level = rng.uniform(a_min, a_max)
        if spec.shape == "square":
            half = max(period // 2, 1)
            out[t:t + half] = level
            out[t + half:t + period] = -level
        else:
            out[t:t + period] = level
        t += period
    return out


def count_levels(series):
    """Number of maximal constant runs in a staircase-like series."""
    series = np.asarray(series)
    return int(1 + np.count_nonzero(np.diff(series) != 0))
