"""Controller x model comparison tables and scatter data."""
import csv
from dataclasses import dataclass

import numpy as np

from .metrics import MetricReport, comfort_metrics

REPORT_COLUMNS = ("controller", "model", "Mdev", "C.E.", "H.E.", "N>26", "N<20")


@dataclass
class ControllerSpec:
    """Frozen controller: learned local/global policies and the baseline filling gaps."""
    name: str
    local_policies: list = None
    global_policy: object = None
    baseline: object = None


def run_controller(env_factory, controller, model, start, n_steps):
    """Deterministic closed-loop run; returns the environment log arrays."""
    env = env_factory(model, controller)
    env.reset(np.random.default_rng(0), state=start)
    done = False
    for _ in range(n_steps):
        _, _, done, _ = env.step([])
    log = env.log
    return {k: np.asarray(v) for k, v in log.items()}


def compare(controllers, models, env_factory, starts, n_days, steps_per_day=144):
    """One :class:`MetricReport` per (controller, model) pair.

    ``env_factory(model, controller)`` builds an evaluation-role environment;
    every pair is run from each start in ``starts`` for ``n_days`` days and
    the metrics pooled. Pairs are independent, so the order of
    ``controllers`` does not change any row.
    """
    reports = []
    for m_name, model in models.items():
        for ctrl in controllers:
            temps, e_h, e_c = [], 0.0, 0.0
            for s in starts:
                log = run_controller(env_factory, ctrl, model, s, n_days * steps_per_day)
                temps.append(log["t_room"])
                e_h += float(log["e_heating"].sum())
                e_c += float(log["e_cooling"].sum())
            t = np.concatenate(temps)
            m_dev, n_hot, n_cold = comfort_metrics(t, steps_per_day)
            reports.append(MetricReport(ctrl.name, m_name, m_dev, e_c, e_h, n_hot, n_cold,
                                        n_days=len(starts) * n_days))
    return reports


def write_report(path, reports):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for r in reports:
            w.writerow([r.controller, r.model, repr(r.m_dev), repr(r.cooling_energy),
                        repr(r.heating_energy), r.n_hot, r.n_cold])


def write_scatter(path, reports):
    """Total energy against Mdev, one point per (controller, model)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("controller", "model", "total_energy", "Mdev"))
        for r in reports:
            w.writerow([r.controller, r.model, repr(r.total_energy), repr(r.m_dev)])


def write_prediction_scatter(path, rows):
    """Rows of ``(model, mae_x, mae_y, delta1)`` for the identification figures."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("model", "mae_x", "mae_y", "delta1"))
        for name, mx, my, d1 in rows:
            w.writerow([name, repr(float(mx)), repr(float(my)), repr(float(d1))])
