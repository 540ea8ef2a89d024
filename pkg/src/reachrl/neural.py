"""Minimal feed-forward network machinery on numpy.

Just enough for a deterministic actor-critic pair: dense layers with
rectifier hidden units, exact reverse-mode gradients (including the input
gradient, which the policy update needs), Adam and plain SGD, and Polyak
target blending. Everything is float64 and runs identically for identical
seeds.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, DivergenceError, ShapeError

OUTPUT_ACTIVATIONS = ("identity", "tanh")


class Mlp:
    """Fully connected network: rectifier hidden layers, configurable output.

    Weights use uniform fan-in initialization (He-style on the hidden
    layers); `final_scale` shrinks the output layer, which the actor uses
    to start with near-zero actions.
    """

    def __init__(self, widths, output_activation: str = "identity",
                 rng: np.random.Generator | None = None, final_scale: float = 1.0):
        widths = tuple(int(w) for w in widths)
        if len(widths) < 2 or any(w < 1 for w in widths):
            raise ConfigError(f"need at least input and output widths >= 1, got {widths}")
        if output_activation not in OUTPUT_ACTIVATIONS:
            raise ConfigError(f"output activation must be one of {OUTPUT_ACTIVATIONS}")
        self.widths = widths
        self.output_activation = output_activation
        rng = rng if rng is not None else np.random.default_rng()
        self.weights = []
        self.biases = []
        n_layers = len(widths) - 1
        for layer in range(n_layers):
            fan_in, fan_out = widths[layer], widths[layer + 1]
            if layer < n_layers - 1:
                limit = np.sqrt(6.0 / fan_in)
            else:
                limit = final_scale / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
            self.biases.append(np.zeros(fan_out))

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def parameters(self) -> list:
        """Live parameter arrays, ordered [W0, b0, W1, b1, ...]."""
        params = []
        for w, b in zip(self.weights, self.biases):
            params.append(w)
            params.append(b)
        return params

    def forward(self, x):
        """Run the network; returns (output, cache) where cache feeds backward.

        Accepts a single input vector or a (batch, width) matrix; the output
        matches the input's shape convention.
        """
        arr = np.asarray(x, dtype=float)
        single = arr.ndim == 1
        h = arr[None, :] if single else arr
        if h.ndim != 2 or h.shape[1] != self.widths[0]:
            raise ShapeError(f"input width {arr.shape} does not match network input {self.widths[0]}")
        inputs = [h]
        pre = []
        for layer in range(self.n_layers):
            z = h @ self.weights[layer].T + self.biases[layer]
            pre.append(z)
            if layer < self.n_layers - 1:
                h = np.maximum(z, 0.0)
                inputs.append(h)
            elif self.output_activation == "tanh":
                h = np.tanh(z)
            else:
                h = z
        cache = {"widths": self.widths, "inputs": inputs, "pre": pre, "out": h, "single": single}
        return (h[0] if single else h), cache

    def backward(self, cache, grad_output):
        """Exact gradients of sum(grad_output * output) for params and input.

        `cache` must come from a forward call on this architecture. Returns
        (param_grads, input_grad) with param_grads ordered like parameters().
        Batched inputs produce parameter gradients summed over the batch.
        """
        if not isinstance(cache, dict) or cache.get("widths") != self.widths:
            raise ShapeError("cache does not match this network; rerun forward")
        if len(cache.get("pre", ())) != self.n_layers:
            raise ShapeError("cache is incomplete; rerun forward")
        out = cache["out"]
        g = np.asarray(grad_output, dtype=float)
        if cache["single"] and g.ndim == 1:
            g = g[None, :]
        if g.shape != out.shape:
            raise ShapeError(f"output gradient shape {g.shape} does not match output {out.shape}")

        grads = [None] * (2 * self.n_layers)
        for layer in reversed(range(self.n_layers)):
            if layer == self.n_layers - 1:
                if self.output_activation == "tanh":
                    dz = g * (1.0 - out ** 2)
                else:
                    dz = g
            else:
                dz = g * (cache["pre"][layer] > 0.0)
            grads[2 * layer] = dz.T @ cache["inputs"][layer]
            grads[2 * layer + 1] = dz.sum(axis=0)
            g = dz @ self.weights[layer]
        input_grad = g[0] if cache["single"] else g
        return grads, input_grad

    def copy(self) -> "Mlp":
        dup = Mlp.__new__(Mlp)
        dup.widths = self.widths
        dup.output_activation = self.output_activation
        dup.weights = [w.copy() for w in self.weights]
        dup.biases = [b.copy() for b in self.biases]
        return dup

    def to_document(self) -> dict:
        return {
            "widths": list(self.widths),
            "output_activation": self.output_activation,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "Mlp":
        net = cls(doc["widths"], doc["output_activation"], rng=np.random.default_rng(0))
        if len(doc["weights"]) != net.n_layers or len(doc["biases"]) != net.n_layers:
            raise ShapeError(f"expected {net.n_layers} layers of parameters")
        for layer, (w, b) in enumerate(zip(doc["weights"], doc["biases"])):
            w = np.asarray(w, dtype=float)
            b = np.asarray(b, dtype=float)
            if w.shape != net.weights[layer].shape or b.shape != net.biases[layer].shape:
                raise ShapeError(f"layer {layer} arrays do not match widths {net.widths}")
            net.weights[layer] = w
            net.biases[layer] = b
        return net


def _check_grads(params, grads):
    if len(params) != len(grads):
        raise ShapeError(f"got {len(grads)} gradients for {len(params)} parameters")
    for p, g in zip(params, grads):
        if p.shape != np.shape(g):
            raise ShapeError(f"gradient shape {np.shape(g)} does not match parameter {p.shape}")
        if not np.all(np.isfinite(g)):
            raise DivergenceError("non-finite gradient", diagnostics={"shape": p.shape})


class Adam:
    """Bias-corrected adaptive-moment optimizer, updating in place."""

    def __init__(self, params, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.step_count = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params, grads, lr: float | None = None):
        _check_grads(params, grads)
        lr = self.lr if lr is None else float(lr)
        self.step_count += 1
        t = self.step_count
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g ** 2
            m_hat = self.m[i] / (1.0 - self.beta1 ** t)
            v_hat = self.v[i] / (1.0 - self.beta2 ** t)
            p -= lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def to_document(self) -> dict:
        return {
            "kind": "adam",
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "step_count": self.step_count,
            "m": [m.tolist() for m in self.m],
            "v": [v.tolist() for v in self.v],
        }

    @classmethod
    def from_document(cls, doc: dict, params) -> "Adam":
        opt = cls(params, lr=doc["lr"], beta1=doc["beta1"], beta2=doc["beta2"], eps=doc["eps"])
        opt.step_count = int(doc["step_count"])
        opt.m = [np.asarray(m, dtype=float) for m in doc["m"]]
        opt.v = [np.asarray(v, dtype=float) for v in doc["v"]]
        _check_grads(params, opt.m)
        return opt


class Sgd:
    """Plain gradient descent with the same interface as Adam."""

    def __init__(self, params, lr: float):
        self.lr = float(lr)
        self.step_count = 0

    def step(self, params, grads, lr: float | None = None):
        _check_grads(params, grads)
        lr = self.lr if lr is None else float(lr)
        self.step_count += 1
        for p, g in zip(params, grads):
            p -= lr * g

    def to_document(self) -> dict:
        return {"kind": "sgd", "lr": self.lr, "step_count": self.step_count}

    @classmethod
    def from_document(cls, doc: dict, params) -> "Sgd":
        opt = cls(params, lr=doc["lr"])
        opt.step_count = int(doc["step_count"])
        return opt


def make_optimizer(name: str, params, lr: float):
    if name == "adam":
        return Adam(params, lr)
    if name == "sgd":
        return Sgd(params, lr)
    raise ConfigError(f"unknown optimizer {name!r}; use 'adam' or 'sgd'")


def optimizer_from_document(doc: dict, params):
    kinds = {"adam": Adam, "sgd": Sgd}
    kind = doc.get("kind")
    if kind not in kinds:
        raise ConfigError(f"unknown optimizer kind {kind!r} in document")
    return kinds[kind].from_document(doc, params)


def soft_update(target: Mlp, source: Mlp, tau: float):
    """Polyak blend: target <- tau * source + (1 - tau) * target, in place."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    if target.widths != source.widths or target.output_activation != source.output_activation:
        raise ShapeError("target and source architectures differ")
    for tp, sp in zip(target.parameters(), source.parameters()):
        tp[...] = tau * sp + (1.0 - tau) * tp
