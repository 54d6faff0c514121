"""Differentiable building blocks: LSTM, MLP, losses, Adam, schedules."""
from .checkpoint import load as load_checkpoint, save as save_checkpoint
from .losses import loss, loss_and_grad
from .lstm import LstmParams, lstm_backward, lstm_forward, lstm_step
from .mlp import MlpParams, mlp_backward, mlp_forward, mlp_forward_cached
from .optim import (AdamState, LrSchedule, adam_update, clip_grad_norm, global_norm,
                    lr_at, sgd_update)

__all__ = [
    "AdamState", "LrSchedule", "LstmParams", "MlpParams", "adam_update", "clip_grad_norm",
    "global_norm", "load_checkpoint", "loss", "loss_and_grad", "lr_at", "lstm_backward",
    "lstm_forward", "lstm_step", "mlp_backward", "mlp_forward", "mlp_forward_cached",
    "save_checkpoint", "sgd_update",
]
