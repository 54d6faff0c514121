"""Supervised training of the encoder-decoder on simulated trajectories."""
import logging
from dataclasses import dataclass

import numpy as np

from ..exceptions import DomainError, NumericError
from ..nn.losses import loss
from ..nn.optim import AdamState, adam_update, clip_grad_norm

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LengthVariation:
    """Encode lengths jitter by +-``encode_jitter`` (relative); decode lengths
    are drawn log-uniformly in ``[decode_low * l, decode_high * l]``."""
    encode_jitter: float = 0.25
    decode_low: float = 0.25
    decode_high: float = 2.0

    def encode_range(self, n):
        return max(1, int(round(n * (1 - self.encode_jitter)))), max(1, int(round(n * (1 + self.encode_jitter))))

    def decode_range(self, l):
        return max(1, int(round(l * self.decode_low))), max(1, int(round(l * self.decode_high)))

    def sample(self, rng, n, l):
        lo, hi = self.encode_range(n)
        n_s = int(rng.integers(lo, hi + 1))
        lo, hi = self.decode_range(l)
        l_s = int(np.clip(round(np.exp(rng.uniform(np.log(lo), np.log(hi)))), lo, hi))
        return n_s, l_s


class WindowSampler:
    """Random (encoder window, decoder inputs, targets) batches from a dataset."""

    def __init__(self, dataset):
        self.dataset = dataset
        self.x = dataset.x
        self.x_sharp = dataset.x_sharp
        self.obs = dataset.observations
        self._starts = {}

    def starts(self, total):
        if total not in self._starts:
            self._starts[total] = self.dataset.valid_starts(total)
        return self._starts[total]

    def gather(self, starts, n, l):
        starts = np.asarray(starts)
        enc_idx = starts[None, :] + np.arange(n)[:, None]
        dec_idx = starts[None, :] + n + np.arange(l)[:, None]
        return self.x[enc_idx], self.x_sharp[dec_idx], self.obs[dec_idx]

    def sample(self, rng, batch_size, n, l):
        pool = self.starts(n + l)
        return self.gather(pool[rng.integers(0, len(pool), size=batch_size)], n, l)

    def fixed(self, n, l, count, seed=0):
        pool = self.starts(n + l)
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(len(pool), size=min(count, len(pool)), replace=False))
        return self.gather(pool[pick], n, l)


def fit_normalizer(dataset, min_scale=1e-6):
    """Per-column mean and standard deviation of ``x`` and of the observations."""
    x = dataset.x
    o = dataset.observations
    x_scale = np.maximum(x.std(axis=0), min_scale)
    o_scale = np.maximum(o.std(axis=0), min_scale)
    return x.mean(axis=0), x_scale, o.mean(axis=0), o_scale


def evaluate_loss(model, batch, kind="squared"):
    enc, dec, target = batch
    pred = model.decode(model.encode(enc), dec)
    return loss(kind, model._norm_o(pred), model._norm_o(target))


def train_stage1(model, sim_data, n_iterations, batch_size=128, lr=1e-4, clip_norm=5.0,
                 variation=LengthVariation(), seed=0, validation=None, eval_every=100,
                 lr_decay_to=None):
    """Fit ``model`` in place on simulated data; returns ``(model, history)``.

    Each minibatch draws its own encode/decode lengths from ``variation``.
    ``history`` holds ``(iteration, train_loss, validation_loss)`` rows, the
    validation loss being measured on a fixed slice at nominal lengths.
    ``lr_decay_to`` optionally anneals the rate linearly to that value.
    """
    rng = np.random.default_rng(seed)
    n, l = model.encode_length, model.decode_length
    _, hi_n = variation.encode_range(n)
    _, hi_l = variation.decode_range(l)
    if not any(b - a >= hi_n + hi_l for a, b in sim_data.episode_bounds()):
        raise DomainError(f"dataset episodes shorter than max lengths {hi_n} + {hi_l}")
    sampler = WindowSampler(sim_data)
    if validation is None:
        validation = sampler.fixed(n, l, 64, seed=seed)
    params = model.params()
    opt = AdamState.for_params(params, lr=lr)
    history = []
    running = None
    for it in range(1, n_iterations + 1):
        n_s, l_s = variation.sample(rng, n, l)
        enc, dec, target = sampler.sample(rng, batch_size, n_s, l_s)
        value, grads = model.loss_and_grads(enc, dec, target)
        if not np.isfinite(value):
            raise NumericError(f"non-finite training loss at iteration {it} (n={n_s}, l={l_s})")
        running = value if running is None else 0.95 * running + 0.05 * value
        step_lr = lr if lr_decay_to is None else lr + (lr_decay_to - lr) * (it - 1) / max(n_iterations - 1, 1)
        adam_update(opt, params, clip_grad_norm(grads, clip_norm), step_lr)
        if it % eval_every == 0 or it == n_iterations:
            val = evaluate_loss(model, validation)
            history.append((it, running, val))
            log.debug("stage1 it=%d train=%.5f val=%.5f", it, running, val)
    return model, history
