"""Metrics, energy model, rule-based baselines and comparison reports."""
from .baselines import BaselineController, BuildingObservation, baseline_step
from .compare import ControllerSpec, compare, write_prediction_scatter, write_report, write_scatter
from .energy import (EnergyModel, energy_estimate, energy_features, fit_energy_model,
                     relative_accuracy)
from .metrics import MetricReport, comfort_metrics, delta1, mae

__all__ = [
    "BaselineController", "BuildingObservation", "baseline_step", "ControllerSpec", "compare",
    "write_prediction_scatter", "write_report", "write_scatter", "EnergyModel",
    "energy_estimate", "energy_features", "fit_energy_model", "relative_accuracy",
    "MetricReport", "comfort_metrics", "delta1", "mae",
]
