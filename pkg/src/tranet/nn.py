"""Minimal dense-network machinery.

Feed-forward networks of dense layers with ReLU/sigmoid activations,
binary cross-entropy loss, hand-written reverse-mode gradients, the ADAM
optimizer and a central-difference gradient checker.  Arrays are numpy;
float32 for training, float64 for gradient-check builds.

Everything is deterministic given an RngStream seed: single-threaded
execution with a fixed batch order reproduces parameters bitwise.
"""

from dataclasses import dataclass, field

import numpy as np

RELU = "relu"
SIGMOID = "sigmoid"

BCE_CLAMP = 1e-7


class ShapeMismatch(ValueError):
    pass


class RngStream:
    """Splittable deterministic random stream (PCG64 under a SeedSequence).

    child(*key) derives an independent stream; the same (seed, key) pair
    yields the same draw sequence on any platform.
    """

    def __init__(self, seed: int, key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)

    def child(self, *key: int) -> "RngStream":
        return RngStream(self.seed, self.key + key)

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, key={self.key})"


def sigmoid(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0)


_ACTIVATIONS = {RELU: relu, SIGMOID: sigmoid}


@dataclass
class DenseLayer:
    W: np.ndarray          # (fan_in, fan_out)
    b: np.ndarray          # (fan_out,)
    activation: str

    def __post_init__(self):
        if self.activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation: {self.activation!r}")
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[1],):
            raise ShapeMismatch(f"inconsistent layer shapes W{self.W.shape} b{self.b.shape}")

    @property
    def fan_in(self) -> int:
        return self.W.shape[0]

    @property
    def fan_out(self) -> int:
        return self.W.shape[1]


def dense_forward(layer: DenseLayer, x: np.ndarray) -> np.ndarray:
    """activation(x W + b), row-wise over a batch."""
    x = np.atleast_2d(x)
    if x.shape[1] != layer.fan_in:
        raise ShapeMismatch(f"input has {x.shape[1]} features, layer expects {layer.fan_in}")
    return _ACTIVATIONS[layer.activation](x @ layer.W + layer.b)


def glorot_init(fan_in: int, fan_out: int, rng: RngStream, dtype=np.float32) -> np.ndarray:
    """Uniform in +-sqrt(6/(fan_in+fan_out))."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    gen = rng.generator()
    return gen.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype)


def make_dense(fan_in: int, fan_out: int, activation: str, rng: RngStream,
               dtype=np.float32) -> DenseLayer:
    return DenseLayer(
        W=glorot_init(fan_in, fan_out, rng, dtype=dtype),
        b=np.zeros(fan_out, dtype=dtype),
        activation=activation,
    )


class Network:
    """A stack of dense layers sharing nothing but shape compatibility.

    Views over a sub-range of another network's layers alias the same
    parameter arrays, so training a view trains the parent in place.
    """

    def __init__(self, layers: list[DenseLayer]):
        for a, b in zip(layers, layers[1:]):
            if a.fan_out != b.fan_in:
                raise ShapeMismatch(f"layer chain breaks: {a.fan_out} -> {b.fan_in}")
        self.layers = list(layers)

    @property
    def d_in(self) -> int:
        return self.layers[0].fan_in

    @property
    def d_out(self) -> int:
        return self.layers[-1].fan_out

    def parameters(self) -> list[np.ndarray]:
        params = []
        for layer in self.layers:
            params.append(layer.W)
            params.append(layer.b)
        return params

    def n_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def forward(self, x: np.ndarray) -> np.ndarray:
        a = np.atleast_2d(x)
        for layer in self.layers:
            a = dense_forward(layer, a)
        return a

    def forward_cached(self, x: np.ndarray) -> list[np.ndarray]:
        """All layer activations, input included; last entry is the output."""
        acts = [np.atleast_2d(x)]
        for layer in self.layers:
            acts.append(dense_forward(layer, acts[-1]))
        return acts

    def view(self, start: int, stop: int) -> "Network":
        return Network(self.layers[start:stop])


def bce_loss(y: np.ndarray, t: np.ndarray) -> float:
    """Mean binary cross-entropy over all elements; y clamped away from {0,1}."""
    y = np.asarray(y)
    t = np.asarray(t)
    if y.shape != t.shape:
        raise ShapeMismatch(f"prediction {y.shape} vs target {t.shape}")
    y = np.clip(y, BCE_CLAMP, 1.0 - BCE_CLAMP)
    return float(-np.mean(t * np.log(y) + (1.0 - t) * np.log(1.0 - y)))


def backward(net: Network, x: np.ndarray, t: np.ndarray):
    """Analytic gradients of bce_loss(net.forward(x), t) for every W and b.

    Returns (loss, grads) with grads ordered like net.parameters().
    The output layer must be sigmoid; its gradient is the fused
    (y - t) / t.size form, which is exact and never saturates.
    """
    if net.layers[-1].activation != SIGMOID:
        raise ValueError("output layer must be sigmoid for BCE gradients")
    acts = net.forward_cached(x)
    y = acts[-1]
    t = np.atleast_2d(np.asarray(t, dtype=y.dtype))
    if y.shape != t.shape:
        raise ShapeMismatch(f"prediction {y.shape} vs target {t.shape}")
    loss = bce_loss(y, t)

    grads: list[np.ndarray] = [None] * (2 * len(net.layers))
    delta = (y - t) / t.size
    for i in range(len(net.layers) - 1, -1, -1):
        a_in = acts[i]
        grads[2 * i] = a_in.T @ delta
        grads[2 * i + 1] = delta.sum(axis=0)
        if i > 0:
            layer = net.layers[i]
            prev = net.layers[i - 1]
            delta = delta @ layer.W.T
            a_prev = acts[i]
            if prev.activation == RELU:
                delta = delta * (a_prev > 0)
            else:
                delta = delta * a_prev * (1.0 - a_prev)
    return loss, grads


@dataclass
class AdamState:
    """Per-parameter first/second moment accumulators plus step counter."""

    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params, alpha=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        return cls(
            alpha=alpha, beta1=beta1, beta2=beta2, eps=eps, t=0,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )


def adam_step(state: AdamState, params, grads):
    """One bias-corrected ADAM update, applied to params in place."""
    if len(params) != len(state.m) or len(params) != len(grads):
        raise ShapeMismatch("params/grads/state length mismatch")
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ShapeMismatch(f"param {p.shape} vs grad {g.shape}")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(g)
        m_hat = m / bc1
        v_hat = v / bc2
        p -= state.alpha * m_hat / (np.sqrt(v_hat) + state.eps)
    return params, state


def gradient_check(net: Network, x: np.ndarray, t: np.ndarray, h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Meant for small float64 networks (<= a few thousand parameters).
    Relative error per parameter: |a - n| / max(1, |a| + |n|).
    """
    _, analytic = backward(net, x, t)
    max_err = 0.0
    for p, g in zip(net.parameters(), analytic):
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            lp = bce_loss(net.forward(x), t)
            flat[j] = orig - h
            lm = bce_loss(net.forward(x), t)
            flat[j] = orig
            numeric = (lp - lm) / (2.0 * h)
            a = gflat[j]
            err = abs(a - numeric) / max(1.0, abs(a) + abs(numeric))
            max_err = max(max_err, err)
    return max_err
