"""System identification: encoder-decoder reduced models and baselines."""
from .ensemble import Ensemble, EnsembleSpec, build_ensemble, load_ensemble, save_ensemble
from .linear_ssm import (LinearSSM, fit_linear_ssm, load_linear_ssm, predict_linear_ssm,
                         save_linear_ssm)
from .reduced_model import ReducedModel, same_weights
from .retrain import (EXIT_BUDGET, EXIT_DRIFT, RetrainConfig, RetrainTrace, StoppingSet,
                      discrepancy, retrain, retrain_fine, retrain_full)
from .training import LengthVariation, WindowSampler, evaluate_loss, fit_normalizer, train_stage1

__all__ = [
    "Ensemble", "EnsembleSpec", "build_ensemble", "load_ensemble", "save_ensemble",
    "LinearSSM", "fit_linear_ssm", "load_linear_ssm", "predict_linear_ssm", "save_linear_ssm", "ReducedModel", "same_weights",
    "EXIT_BUDGET", "EXIT_DRIFT", "RetrainConfig", "RetrainTrace", "StoppingSet", "discrepancy",
    "retrain", "retrain_fine", "retrain_full", "LengthVariation", "WindowSampler",
    "evaluate_loss", "fit_normalizer", "train_stage1",
]
