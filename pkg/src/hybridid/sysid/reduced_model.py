"""LSTM encoder-decoder surrogate of a dynamic system.

The encoder reads ``n`` full steps ``x = (commands, exogenous, observations)``
from a zero state. Its final ``(c, h)`` seeds the decoder, which reads only
``x_sharp = (commands, exogenous)`` and emits one hidden state per step; an
MLP head maps each hidden state to an observation estimate. The decoder
never sees observations, so predictions are a free run.

Inputs and outputs are affinely normalized with statistics frozen at
construction (``x_mean``/``x_scale``, ``o_mean``/``o_scale``); losses are
computed in normalized output units.
"""
from dataclasses import dataclass

import numpy as np

from .._validation import check_finite
from ..exceptions import ShapeError
from ..nn import checkpoint
from ..nn.losses import loss_and_grad
from ..nn.lstm import LstmParams, lstm_backward, lstm_forward
from ..nn.mlp import MlpParams, mlp_backward, mlp_forward, mlp_forward_cached


@dataclass
class ReducedModel:
    encoder: LstmParams
    decoder: LstmParams
    head: MlpParams
    d_I: int
    d_E: int
    d_O: int
    encode_length: int = 12
    decode_length: int = 100
    x_mean: np.ndarray = None
    x_scale: np.ndarray = None
    o_mean: np.ndarray = None
    o_scale: np.ndarray = None

    def __post_init__(self):
        d, d_sharp = self.d, self.d_sharp
        if self.encoder.input_dim != d:
            raise ShapeError(f"encoder input width {self.encoder.input_dim}, expected d = {d}")
        if self.decoder.input_dim != d_sharp:
            raise ShapeError(f"decoder input width {self.decoder.input_dim}, expected {d_sharp}")
        if self.encoder.hidden_dim != self.decoder.hidden_dim:
            raise ShapeError("encoder and decoder must share the hidden size")
        if self.head.layer_sizes[0] != self.hidden_dim or self.head.layer_sizes[-1] != self.d_O:
            raise ShapeError(f"head must map {self.hidden_dim} -> {self.d_O}")
        if self.encode_length < 1 or self.decode_length < 1:
            raise ShapeError("encode and decode lengths must be >= 1")
        self.x_mean = np.zeros(d) if self.x_mean is None else np.asarray(self.x_mean, dtype=float)
        self.x_scale = np.ones(d) if self.x_scale is None else np.asarray(self.x_scale, dtype=float)
        self.o_mean = np.zeros(self.d_O) if self.o_mean is None else np.asarray(self.o_mean, dtype=float)
        self.o_scale = np.ones(self.d_O) if self.o_scale is None else np.asarray(self.o_scale, dtype=float)

    # -- construction ------------------------------------------------------------
    @classmethod
    def init(cls, d_I, d_E, d_O, hidden_dim=32, mlp_sizes=(64, 32, 16), encode_length=12,
             decode_length=100, rng=None, normalizer=None):
        rng = np.random.default_rng(rng)
        d = d_I + d_E + d_O
        model = cls(LstmParams.init(d, hidden_dim, rng), LstmParams.init(d - d_O, hidden_dim, rng),
                    MlpParams.init((hidden_dim, *mlp_sizes, d_O), rng), d_I, d_E, d_O,
                    encode_length, decode_length)
        if normalizer is not None:
            model.set_normalizer(*normalizer)
        return model

    def set_normalizer(self, x_mean, x_scale, o_mean, o_scale):
        self.x_mean, self.x_scale = np.asarray(x_mean, float), np.asarray(x_scale, float)
        self.o_mean, self.o_scale = np.asarray(o_mean, float), np.asarray(o_scale, float)

    @property
    def d(self):
        return self.d_I + self.d_E + self.d_O

    @property
    def d_sharp(self):
        return self.d_I + self.d_E

    @property
    def hidden_dim(self):
        return self.encoder.hidden_dim

    def params(self):
        """Flat name -> array mapping; arrays are the live parameters."""
        out = {}
        out.update(self.encoder.named("encoder."))
        out.update(self.decoder.named("decoder."))
        out.update(self.head.named("head."))
        return out

    def head_layer_keys(self, layer):
        return [f"head.{layer}.W", f"head.{layer}.b"]

    def copy(self):
        return ReducedModel(self.encoder.copy(), self.decoder.copy(), self.head.copy(), self.d_I,
                            self.d_E, self.d_O, self.encode_length, self.decode_length,
                            self.x_mean.copy(), self.x_scale.copy(), self.o_mean.copy(),
                            self.o_scale.copy())

    # -- normalization -------------------------------------------------------------
    def _norm_x(self, x):
        return (x - self.x_mean) / self.x_scale

    def _norm_xs(self, xs):
        d_s = self.d_sharp
        return (xs - self.x_mean[:d_s]) / self.x_scale[:d_s]

    def _denorm_o(self, o):
        return o * self.o_scale + self.o_mean

    def _norm_o(self, o):
        return (o - self.o_mean) / self.o_scale

    # -- inference -----------------------------------------------------------------
    def encode(self, window):
        """Encoder state after reading ``window`` ((n, d) or (n, B, d))."""
        window = np.asarray(window, dtype=np.float64)
        single = window.ndim == 2
        if single:
            window = window[:, None, :]
        if window.shape[-1] != self.d:
            raise ShapeError(f"encoder window width {window.shape[-1]}, expected {self.d}")
        B, p = window.shape[1], self.hidden_dim
        _, (c, h), _ = lstm_forward(self.encoder, self._norm_x(window), np.zeros((B, p)),
                                    np.zeros((B, p)))
        return (c[0], h[0]) if single else (c, h)

    def decode(self, init, inputs):
        """Free-run ``len(inputs)`` steps of observation estimates from state ``init``."""
        c, h = (np.asarray(a, dtype=np.float64) for a in init)
        inputs = np.asarray(inputs, dtype=np.float64)
        single = inputs.ndim == 2
        if single:
            inputs = inputs[:, None, :]
            c, h = c.reshape(1, -1), h.reshape(1, -1)
        if c.shape[-1] != self.hidden_dim or h.shape[-1] != self.hidden_dim:
            raise ShapeError(f"initial state width must be {self.hidden_dim}")
        if inputs.shape[-1] != self.d_sharp:
            raise ShapeError(f"decoder inputs width {inputs.shape[-1]}, expected {self.d_sharp}")
        hs, _, _ = lstm_forward(self.decoder, self._norm_xs(inputs), c, h)
        out = self._denorm_o(mlp_forward(self.head, hs))
        return out[:, 0, :] if single else out

    def predict(self, window, inputs):
        return self.decode(self.encode(window), inputs)

    def decoder_step(self, state, x_sharp):
        """One decoder step for online use; returns ``(new_state, o_hat)``."""
        from ..nn.lstm import lstm_step
        c, h = state
        c, h = lstm_step(self.decoder, self._norm_xs(np.asarray(x_sharp, dtype=np.float64)), c, h)
        return (c, h), self._denorm_o(mlp_forward(self.head, h))

    # -- training ------------------------------------------------------------------
    def loss_and_grads(self, enc_x, dec_x, target, kind="squared", keys=None):
        """Loss over a batch plus gradients for every parameter.

        ``enc_x`` (n, B, d), ``dec_x`` (l, B, d_sharp), ``target`` (l, B, d_O)
        in physical units. Gradients are reverse-mode through the complete
        unrolled encoder and decoder. ``keys`` restricts the returned dict.
        """
        n, B, _ = enc_x.shape
        p = self.hidden_dim
        zeros = np.zeros((B, p))
        _, (c0, h0), enc_cache = lstm_forward(self.encoder, self._norm_x(enc_x), zeros, zeros)
        hs, _, dec_cache = lstm_forward(self.decoder, self._norm_xs(dec_x), c0, h0)
        out, mlp_inputs = mlp_forward_cached(self.head, hs)
        check_finite(out, "model output")
        value, dout = loss_and_grad(kind, out, self._norm_o(target))
        head_grads, dhs = mlp_backward(self.head, mlp_inputs, dout)
        grads = {f"head.{k}": v for k, v in head_grads.items()}
        if keys is not None and all(k.startswith("head.") for k in keys):
            return value, {k: grads[k] for k in keys}
        dec_grads, _, dc0, dh0 = lstm_backward(self.decoder, dec_cache, dhs)
        enc_grads, _, _, _ = lstm_backward(self.encoder, enc_cache, None, dc0, dh0)
        grads.update({f"decoder.{k}": v for k, v in dec_grads.items()})
        grads.update({f"encoder.{k}": v for k, v in enc_grads.items()})
        if keys is not None:
            grads = {k: grads[k] for k in keys}
        return value, grads

    # -- persistence -----------------------------------------------------------------
    def to_blocks(self):
        blocks = dict(self.params())
        blocks.update({"norm.x_mean": self.x_mean, "norm.x_scale": self.x_scale,
                       "norm.o_mean": self.o_mean, "norm.o_scale": self.o_scale})
        meta = {"kind": "reduced-model", "d_I": self.d_I, "d_E": self.d_E, "d_O": self.d_O,
                "encode_length": self.encode_length, "decode_length": self.decode_length,
                "hidden_dim": self.hidden_dim, "head_sizes": list(self.head.layer_sizes)}
        return {k: np.asarray(v) for k, v in blocks.items()}, meta

    def save(self, path):
        blocks, meta = self.to_blocks()
        checkpoint.save(path, blocks, meta)

    @classmethod
    def from_blocks(cls, blocks, meta):
        n_layers = len(meta["head_sizes"]) - 1
        head = MlpParams([blocks[f"head.{k}.W"] for k in range(n_layers)],
                         [blocks[f"head.{k}.b"] for k in range(n_layers)])
        return cls(LstmParams(blocks["encoder.W"], blocks["encoder.b"]),
                   LstmParams(blocks["decoder.W"], blocks["decoder.b"]), head,
                   meta["d_I"], meta["d_E"], meta["d_O"], meta["encode_length"],
                   meta["decode_length"], blocks["norm.x_mean"], blocks["norm.x_scale"],
                   blocks["norm.o_mean"], blocks["norm.o_scale"])

    @classmethod
    def load(cls, path):
        return cls.from_blocks(*checkpoint.load(path))


def same_weights(a, b):
    """Bitwise equality of every parameter array."""
    pa, pb = a.params(), b.params()
    return pa.keys() == pb.keys() and all(np.array_equal(pa[k], pb[k]) for k in pa)
