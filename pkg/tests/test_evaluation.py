import numpy as np
import pytest

from hybridid.evaluation.baselines import CLOSED, HALF, BaselineController
from hybridid.evaluation.energy import (EnergyModel, energy_estimate, energy_features,
                                        fit_energy_model, relative_accuracy)
from hybridid.evaluation.metrics import MetricReport, comfort_metrics, delta1, mae
from hybridid.exceptions import DomainError, FitError, ShapeError
from hybridid.sim.building import COOLING, HEATING


# -- metrics ---------------------------------------------------------------------------------

def test_mae_hand_values():
    assert mae([1.0, 2.0, 3.0], [1.0, 1.0, 1.0]) == pytest.approx(1.0)
    np.testing.assert_allclose(mae([[0.0, 1.0], [2.0, 1.0]], [[1.0, 1.0], [1.0, 3.0]]), [1.0, 1.0])
    with pytest.raises(ShapeError):
        mae([1.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        mae([], [])


def test_delta1_on_and_off_the_circle():
    th = np.linspace(0, 2 * np.pi, 50)
    assert delta1(np.cos(th), np.sin(th)) == pytest.approx(0.0, abs=1e-15)
    assert delta1([0.6, 0.0], [0.8, 1.5]) == pytest.approx(0.25)


def test_comfort_metrics_hand_values():
    t = np.full((288, 2), 23.0)
    t[10, 0] = 27.0      # day 0: hot room 0, DEV max 4
    t[200, 1] = 19.0     # day 1: cold room 1, DEV max 4
    t[201, :] = 24.5     # day 1: DEV 3
    m_dev, n_hot, n_cold = comfort_metrics(t)
    assert m_dev == pytest.approx(4.0)
    assert (n_hot, n_cold) == (1, 1)


def test_comfort_metrics_requires_whole_days():
    with pytest.raises(DomainError):
        comfort_metrics(np.full((100, 2), 23.0))


def test_metric_report_rejects_negative():
    with pytest.raises(DomainError):
        MetricReport("c", "m", -1.0, 0.0, 0.0, 0, 0)
    r = MetricReport("c", "m", 1.0, 2.0, 3.0, 0, 0)
    assert r.total_energy == 5.0 and "extra" not in r.row()


# -- baselines ---------------------------------------------------------------------------------

def test_blinds1_schedule():
    c = BaselineController("blinds-1")
    orient = ("north", "south", "west")
    assert list(c.blinds(np.full(3, 23.0), 0.0, 9, orient)) == [CLOSED, 0, 0]
    assert list(c.blinds(np.full(3, 23.0), 0.0, 13, orient)) == [0, CLOSED, 0]
    assert list(c.blinds(np.full(3, 23.0), 0.0, 17, orient)) == [0, 0, CLOSED]


def test_threshold_blind_rules():
    t = np.array([26.0, 24.8, 24.2, 23.0])
    c2 = BaselineController("blinds-2")
    assert list(c2.blinds(t, 500.0, 12, ())) == [CLOSED, HALF, HALF, 0]
    c3 = BaselineController("blinds-3")
    assert list(c3.blinds(t, 350.0, 12, ())) == [CLOSED, CLOSED, 0, 0]
    assert list(c3.blinds(t, 200.0, 12, ())) == [0, 0, 0, 0]


def test_heating_curve_and_validation():
    c = BaselineController()
    assert c.heating_curve(-10.0) == 45.0 and c.heating_curve(20.0) == 25.0
    assert c.heating_curve(5.0) == pytest.approx(35.0)
    with pytest.raises(DomainError):
        BaselineController(curve_t_flow=(25.0, 45.0))
    with pytest.raises(DomainError):
        BaselineController("unknown")


def test_global_commands_follow_mode():
    c = BaselineController()
    zones = np.array([0, 0, 1])
    mode, t_flow, t_air, valves = c.global_commands(np.full(3, 21.0), 0.0, HEATING, zones)
    assert mode == HEATING and t_flow == pytest.approx(c.heating_curve(0.0))
    assert t_air.shape == (2,) and np.all((t_air >= 16) & (t_air <= 26))
    mode, t_flow, _, _ = c.global_commands(np.full(3, 25.0), 30.0, COOLING, zones)
    assert mode == COOLING and t_flow == c.cooling_t_flow


# -- energy model ---------------------------------------------------------------------------------

def synthetic_energy(n=400, seed=0):
    rng = np.random.default_rng(seed)
    valve = rng.uniform(0, 1, (n, 3))
    t_flow = rng.uniform(16, 45, n)
    t_air = rng.uniform(16, 26, (n, 2))
    t_out = rng.uniform(-5, 30, n)
    irr = rng.uniform(0, 800, n)
    X = energy_features(valve, t_flow, t_air, t_out, irr)
    true = EnergyModel([0.05, 0.02, 0.0, 0.0], 0.1, [-0.04, -0.01, 0.0, 0.0], 0.05)
    h, c = true.rates(X)
    return X, h, c, true


def test_energy_features_hand_value():
    X = energy_features([[1.0, 0.5]], [33.0], [[20.0]], [10.0], [100.0])
    np.testing.assert_allclose(X, [[15.0, 10.0, 10.0, 100.0]])


def test_energy_fit_recovers_rectified_model():
    X, h, c, true = synthetic_energy()
    m = fit_energy_model(X, h, c, n_iter=2000)
    assert relative_accuracy(m, X, h, c) > 0.95
    assert np.all(m.heating_w[:2] >= 0) and np.all(m.cooling_w[:2] <= 0)


def test_energy_fit_degenerate_data():
    X, h, c, _ = synthetic_energy(n=50)
    with pytest.raises(FitError):
        fit_energy_model(X, np.zeros(50), c)
    with pytest.raises(ShapeError):
        fit_energy_model(X, h[:10], c)


def test_energy_model_sign_constraints():
    with pytest.raises(FitError):
        EnergyModel([-1.0, 0.0, 0.0, 0.0], 0.0, [0.0] * 4, 0.0)
    m = EnergyModel([1.0, 0.0, 0.0, 0.0], -5.0, [0.0] * 4, 0.0)
    assert energy_estimate(m, np.array([[1.0, 0, 0, 0], [10.0, 0, 0, 0]])) == (5.0, 0.0)
