"""Fully connected network: rectifier (or tanh) hidden layers, identity output."""
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ShapeError


@dataclass
class MlpParams:
    weights: list
    biases: list
    hidden_activation: str = "relu"
    output_activation: str = "identity"
    _sizes: tuple = field(init=False, repr=False)

    def __post_init__(self):
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        if not self.weights or len(self.weights) != len(self.biases):
            raise ShapeError("need one bias per weight matrix and at least one layer")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ShapeError(f"layer {k}: weight {w.shape} / bias {b.shape} mismatch")
            if k and self.weights[k - 1].shape[1] != w.shape[0]:
                raise ShapeError(f"layer {k} input {w.shape[0]} != previous output "
                                 f"{self.weights[k - 1].shape[1]}")
        if self.hidden_activation not in ("relu", "tanh"):
            raise ShapeError(f"unsupported hidden activation {self.hidden_activation!r}")
        self._sizes = (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    @property
    def layer_sizes(self):
        return self._sizes

    @property
    def n_layers(self):
        return len(self.weights)

    @classmethod
    def init(cls, layer_sizes, rng, output_scale=1.0, hidden_activation="relu"):
        weights, biases = [], []
        for k, (n_in, n_out) in enumerate(zip(layer_sizes[:-1], layer_sizes[1:])):
            bound = 1.0 / np.sqrt(n_in)
            w = rng.uniform(-bound, bound, size=(n_in, n_out))
            if k == len(layer_sizes) - 2:
                w *= output_scale
            weights.append(w)
            biases.append(np.zeros(n_out))
        return cls(weights, biases, hidden_activation)

    def named(self, prefix=""):
        out = {}
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"{prefix}{k}.W"] = w
            out[f"{prefix}{k}.b"] = b
        return out

    def copy(self):
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases],
                         self.hidden_activation, self.output_activation)


def _check_input(params, h):
    h = np.asarray(h, dtype=np.float64)
    if h.shape[-1] != params.layer_sizes[0]:
        raise ShapeError(f"input width {h.shape[-1]}, expected {params.layer_sizes[0]}")
    return h


def _hidden(params, z):
    if params.hidden_activation == "tanh":
        return np.tanh(z)
    return np.maximum(z, 0.0)


def mlp_forward(params, h):
    a = _check_input(params, h)
    last = params.n_layers - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        a = a @ w + b
        if k < last:
            a = _hidden(params, a)
    return a


def mlp_forward_cached(params, h):
    """Forward pass that keeps each layer's input for :func:`mlp_backward`."""
    a = _check_input(params, h)
    inputs = []
    last = params.n_layers - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        inputs.append(a)
        a = a @ w + b
        if k < last:
            a = _hidden(params, a)
    return a, inputs


def mlp_backward(params, inputs, dout):
    """Gradients for every layer plus the gradient w.r.t. the network input.

    Works for inputs with any number of leading axes; they are summed over.
    """
    grads = {}
    delta = dout
    for k in range(params.n_layers - 1, -1, -1):
        a = inputs[k]
        a2 = a.reshape(-1, a.shape[-1])
        d2 = delta.reshape(-1, delta.shape[-1])
        grads[f"{k}.W"] = a2.T @ d2
        grads[f"{k}.b"] = d2.sum(axis=0)
        delta = delta @ params.weights[k].T
        if k > 0:
            # derivative from the stored activation output
            delta = delta * ((1.0 - a * a) if params.hidden_activation == "tanh" else (a > 0))
    return grads, delta
