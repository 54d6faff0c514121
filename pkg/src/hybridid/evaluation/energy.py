"""Rectified sign-constrained linear energy model.

Per mode, ``E = max(0, X w + b)`` where ``X`` holds features of the supply
commands and the weather. Coefficients listed in ``signs`` are forced to be
non-negative (+1) or non-positive (-1); 0 leaves a coefficient free.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import lsq_linear

from ..exceptions import FitError, ShapeError

T_REF = 23.0
FEATURES = ("hydronic", "ventilation", "t_out", "irradiance")
# heating grows with hot supply water/air, cooling with cold supply
SIGNS = {"heating": (1, 1, 0, 0), "cooling": (-1, -1, 0, 0)}


def energy_features(valve, t_flow, t_air, t_out, irradiance, c_r=1.0):
    """Feature matrix (steps, 4) from command and weather series.

    ``valve`` (steps, rooms), ``t_air`` (steps, zones); the rest per step.
    """
    valve = np.atleast_2d(np.asarray(valve, dtype=float))
    t_air = np.atleast_2d(np.asarray(t_air, dtype=float))
    t_flow = np.asarray(t_flow, dtype=float).reshape(-1)
    t_out = np.asarray(t_out, dtype=float).reshape(-1)
    irr = np.asarray(irradiance, dtype=float).reshape(-1)
    hydro = valve.sum(axis=1) * (t_flow - T_REF)
    vent = (c_r * (t_air - t_out[:, None])).sum(axis=1)
    return np.column_stack([hydro, vent, t_out, irr])


@dataclass
class EnergyModel:
    heating_w: np.ndarray
    heating_b: float
    cooling_w: np.ndarray
    cooling_b: float

    def __post_init__(self):
        self.heating_w = np.asarray(self.heating_w, dtype=float)
        self.cooling_w = np.asarray(self.cooling_w, dtype=float)
        for mode, w in (("heating", self.heating_w), ("cooling", self.cooling_w)):
            s = np.asarray(SIGNS[mode])
            if w.shape != s.shape:
                raise ShapeError(f"{mode} coefficients must have {len(s)} entries")
            if np.any(w * s < 0):
                raise FitError(f"{mode} coefficients violate their sign constraints")

    def rates(self, features):
        X = np.atleast_2d(features)
        return (np.maximum(X @ self.heating_w + self.heating_b, 0.0),
                np.maximum(X @ self.cooling_w + self.cooling_b, 0.0))


def energy_estimate(model, features):
    """Total ``(E_heating, E_cooling)`` over the rows of ``features``."""
    h, c = model.rates(features)
    return float(h.sum()), float(c.sum())


def _bounds(signs):
    lo = np.array([0.0 if s > 0 else -np.inf for s in signs] + [-np.inf])
    hi = np.array([0.0 if s < 0 else np.inf for s in signs] + [np.inf])
    return lo, hi


def _fit_mode(X, y, signs, n_iter, lr):
    if len(y) < X.shape[1] + 1 or not np.any(y > 0):
        raise FitError("not enough informative samples to fit the energy model")
    A = np.column_stack([X, np.ones(len(X))])
    scale = np.maximum(np.abs(A).max(axis=0), 1e-12)
    An = A / scale
    lo, hi = _bounds(signs)
    lo, hi = lo * scale, hi * scale
    # bounded least squares on the active samples gives the starting point
    active = y > 0
    theta = lsq_linear(An[active], y[active], bounds=(lo, hi)).x
    # projected gradient on the rectified objective over all samples
    L = np.linalg.norm(An, 2) ** 2 / len(y)
    step = lr / max(L, 1e-12)
    for _ in range(n_iter):
        z = An @ theta
        r = np.maximum(z, 0.0) - y
        g = An.T @ (r * (z > 0)) / len(y)
        theta = np.clip(theta - step * g, lo, hi)
    theta = theta / scale
    return theta[:-1], float(theta[-1])


def fit_energy_model(features, e_heating, e_cooling, n_iter=500, lr=1.0):
    """Fit both modes; raises ``FitError`` on degenerate data."""
    X = np.asarray(features, dtype=float)
    e_heating = np.asarray(e_heating, dtype=float)
    e_cooling = np.asarray(e_cooling, dtype=float)
    if X.ndim != 2 or len(X) != len(e_heating) or len(X) != len(e_cooling):
        raise ShapeError("features and targets must be aligned")
    if not np.all(np.isfinite(X)):
        raise FitError("non-finite features")
    wh, bh = _fit_mode(X, e_heating, SIGNS["heating"], n_iter, lr)
    wc, bc = _fit_mode(X, e_cooling, SIGNS["cooling"], n_iter, lr)
    return EnergyModel(wh, bh, wc, bc)


def relative_accuracy(model, features, e_heating, e_cooling):
    """``1 - sum|err| / sum|target|`` over both modes."""
    h, c = model.rates(features)
    err = np.abs(h - e_heating).sum() + np.abs(c - e_cooling).sum()
    total = np.abs(e_heating).sum() + np.abs(e_cooling).sum()
    return float(1.0 - err / max(total, 1e-12))
