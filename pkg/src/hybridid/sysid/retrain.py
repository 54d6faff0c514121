"""Retraining on historical data under a drift-bounded stopping rule.

Two procedures share the rule: every ``p_eval`` updates, the mean absolute
difference between the retrained model and the frozen simulation-trained
model is measured over a fixed grid of environmental x command scenarios;
retraining stops as soon as that drift exceeds ``delta_max`` or the update
budget ``n_max`` is spent.

* ``retrain_full`` updates every weight with Adam.
* ``retrain_fine`` updates only the head, one layer at a time from the
  output layer inward, with plain SGD at rate ``lr_at(schedule, n) * mu**j``
  for the ``j``-th layer visited.
"""
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import DomainError, ShapeError
from ..nn.optim import AdamState, LrSchedule, adam_update, clip_grad_norm, lr_at, sgd_update
from .training import WindowSampler

log = logging.getLogger(__name__)

EXIT_DRIFT = "discrepancy"
EXIT_BUDGET = "max-iterations"


@dataclass
class StoppingSet:
    """Grid of exogenous sequences x command sequences.

    ``environments[i]`` has shape (L, d_E) and ``commands[j]`` shape
    (L, d_I); every pair is concatenated into one decoder input
    ``x_sharp = (commands, exogenous)``. ``prefixes`` supplies the encoder
    window: a single (n, d) array shared by all pairs, one per environment,
    or one per pair in ``itertools.product`` order.
    """
    environments: list
    commands: list
    prefixes: object

    def __post_init__(self):
        if not self.environments or not self.commands:
            raise DomainError("stopping set needs at least one environment and one command sequence")
        self.environments = [np.asarray(e, dtype=np.float64).reshape(len(e), -1) for e in self.environments]
        self.commands = [np.asarray(c, dtype=np.float64).reshape(len(c), -1) for c in self.commands]
        lengths = {len(a) for a in self.environments + self.commands}
        if len(lengths) != 1:
            raise ShapeError(f"all scenario sequences must share one length, got {sorted(lengths)}")
        if isinstance(self.prefixes, np.ndarray) and self.prefixes.ndim == 2:
            self.prefixes = [self.prefixes]
        self.prefixes = [np.asarray(p, dtype=np.float64) for p in self.prefixes]
        if len(self.prefixes) not in (1, len(self.environments), self.n_pairs):
            raise ShapeError("prefixes must be shared, per environment or per pair")
        if len({p.shape for p in self.prefixes}) != 1:
            raise ShapeError("all encoder prefixes must have the same shape")

    @property
    def n_pairs(self):
        return len(self.environments) * len(self.commands)

    @property
    def length(self):
        return len(self.commands[0])

    def batch(self):
        """Encoder windows (n, P, d) and decoder inputs (L, P, d_sharp) for all pairs."""
        enc, dec = [], []
        for k, (i, j) in enumerate(itertools.product(range(len(self.environments)),
                                                     range(len(self.commands)))):
            if len(self.prefixes) == 1:
                enc.append(self.prefixes[0])
            elif len(self.prefixes) == len(self.environments) and len(self.prefixes) != self.n_pairs:
                enc.append(self.prefixes[i])
            else:
                enc.append(self.prefixes[k])
            dec.append(np.concatenate([self.commands[j], self.environments[i]], axis=1))
        return np.stack(enc, axis=1), np.stack(dec, axis=1)

    def outputs(self, model):
        enc, dec = self.batch()
        if enc.shape[-1] != model.d or dec.shape[-1] != model.d_sharp:
            raise ShapeError("stopping set does not match the model's dimension record")
        return model.decode(model.encode(enc), dec)


def discrepancy(model_a, model_b, stopping_set, reference=None):
    """Mean absolute difference of decoded outputs over the whole grid.

    ``reference`` may hold precomputed outputs of ``model_a``.
    """
    if reference is None and (model_a.d_I, model_a.d_E, model_a.d_O) != (
            model_b.d_I, model_b.d_E, model_b.d_O):
        raise ShapeError("models have different dimension records")
    out_a = stopping_set.outputs(model_a) if reference is None else reference
    out_b = stopping_set.outputs(model_b)
    return float(np.mean(np.abs(out_a - out_b)))


@dataclass(frozen=True)
class RetrainConfig:
    algorithm: str = "full"
    delta_max: float = 0.2
    n_max: int = 1000
    p_eval: int = 10
    batch_size: int = 128
    lr: float = 1e-4
    # full retraining: anneal Adam's rate linearly to this value (None keeps it constant)
    lr_final: float = None
    mu: float = 1 / 2.6
    schedule: LrSchedule = None
    clip_norm: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ("full", "fine"):
            raise DomainError(f"unknown retraining algorithm {self.algorithm!r}")
        if self.delta_max < 0:
            raise DomainError("delta_max must be >= 0")
        if self.n_max < 0:
            raise DomainError("n_max must be >= 0")
        if self.p_eval < 1 or self.p_eval > max(1, self.n_max // 10):
            raise DomainError(f"p_eval must lie in [1, max(1, n_max // 10)], got {self.p_eval}")
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")
        if self.algorithm == "fine" and not 0 < self.mu < 1:
            raise DomainError("mu must lie in (0, 1)")

    def lr_schedule(self):
        if self.schedule is not None:
            return self.schedule
        return LrSchedule("slanted-triangular", eta_max=0.1, cut_frac=0.1, ratio=40.0,
                          T=max(self.n_max, 1))


@dataclass
class RetrainTrace:
    """Every recorded ``(layer, iteration, delta)`` plus how the loop ended."""
    config: RetrainConfig
    records: list = field(default_factory=list)
    exit_reason: str = ""
    n_iter: int = 0
    layers_visited: list = field(default_factory=list)

    @property
    def deltas(self):
        return [r[2] for r in self.records]

    @property
    def final_delta(self):
        return self.records[-1][2] if self.records else 0.0

    def satisfies_stopping_rule(self):
        """Exactly one exit condition holds and no earlier delta broke the bound."""
        d = self.deltas
        dm = self.config.delta_max
        drift = bool(d) and d[-1] > dm and all(x <= dm for x in d[:-1])
        budget = self.n_iter >= self.config.n_max and all(x <= dm for x in d)
        return drift != budget and (self.exit_reason == EXIT_DRIFT) == drift


def _check_hist(hist):
    if hist is None or len(hist) == 0:
        raise DomainError("historical dataset is empty")


def _run_loop(model, reference, stopping_set, sampler, cfg, trace, keys, update, rng, layer=None):
    """Shared update / evaluate / stop loop; returns True if drift stopped it."""
    n, l = model.encode_length, model.decode_length
    it = 0
    last_eval = -1
    while it < cfg.n_max:
        enc, dec, target = sampler.sample(rng, cfg.batch_size, n, l)
        _, grads = model.loss_and_grads(enc, dec, target, keys=keys)
        update(clip_grad_norm(grads, cfg.clip_norm), it)
        it += 1
        if it % cfg.p_eval == 0:
            last_eval = it
            delta = discrepancy(None, model, stopping_set, reference)
            trace.records.append((layer, it, delta))
            if delta > cfg.delta_max:
                trace.n_iter = it
                return True
    if last_eval != it:
        delta = discrepancy(None, model, stopping_set, reference)
        trace.records.append((layer, it, delta))
        trace.n_iter = it
        return delta > cfg.delta_max
    trace.n_iter = it
    return False


def retrain_full(model, hist, cfg, stopping_set):
    """Adam on all weights; returns ``(retrained copy, trace)``."""
    if cfg.algorithm != "full":
        raise DomainError("retrain_full needs a config with algorithm='full'")
    _check_hist(hist)
    sampler = WindowSampler(hist)
    reference = stopping_set.outputs(model)
    new = model.copy()
    params = new.params()
    opt = AdamState.for_params(params, lr=cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    trace = RetrainTrace(cfg)

    def update(grads, it):
        lr = cfg.lr
        if cfg.lr_final is not None and cfg.n_max > 1:
            lr = cfg.lr + (cfg.lr_final - cfg.lr) * it / (cfg.n_max - 1)
        adam_update(opt, params, grads, lr)

    drift = _run_loop(new, reference, stopping_set, sampler, cfg, trace, None, update, rng)
    trace.exit_reason = EXIT_DRIFT if drift else EXIT_BUDGET
    trace.layers_visited = ["all"]
    return new, trace


def retrain_fine(model, hist, cfg, stopping_set):
    """Layer-wise SGD on the head only, output layer first; returns ``(copy, trace)``.

    Stops everything once any layer's drift exceeds ``delta_max``.
    """
    if cfg.algorithm != "fine":
        raise DomainError("retrain_fine needs a config with algorithm='fine'")
    _check_hist(hist)
    sampler = WindowSampler(hist)
    reference = stopping_set.outputs(model)
    new = model.copy()
    params = new.params()
    schedule = cfg.lr_schedule()
    rng = np.random.default_rng(cfg.seed)
    trace = RetrainTrace(cfg)
    drift = False
    for depth, layer in enumerate(range(new.head.n_layers - 1, -1, -1)):
        keys = new.head_layer_keys(layer)
        scale = cfg.mu ** depth

        def update(grads, it, scale=scale):
            sgd_update(params, grads, lr_at(schedule, min(it, schedule.T)) * scale)

        trace.layers_visited.append(layer)
        drift = _run_loop(new, reference, stopping_set, sampler, cfg, trace, keys, update, rng,
                          layer=layer)
        if drift:
            break
    trace.exit_reason = EXIT_DRIFT if drift else EXIT_BUDGET
    return new, trace


def retrain(model, hist, cfg, stopping_set):
    fn = retrain_full if cfg.algorithm == "full" else retrain_fine
    return fn(model, hist, cfg, stopping_set)
