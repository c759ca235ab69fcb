"""Dense networks with hand-written backprop.

A network is a list of (weight, bias) pairs applied as
z_i = a_i @ W_i.T + b_i with the configured nonlinearity between layers
and an identity output layer. All math is float64.

mlp_gradient consumes the cache produced by mlp_forward_cached and an
upstream gradient dL/dy, returning both the parameter gradients (in the
same flat order as Mlp.params()) and dL/dx. Caches are stamped with the
network's version counter; any in-place parameter update bumps the
counter, so a stale cache cannot silently produce wrong gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_ACTIVATIONS = ("tanh", "relu")


@dataclass
class Mlp:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]  # weights[i]: (layer_sizes[i+1], layer_sizes[i])
    biases: list[np.ndarray]  # biases[i]: (layer_sizes[i+1],)
    activation: str = "tanh"
    version: int = 0

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def input_size(self) -> int:
        return int(self.layer_sizes[0])

    @property
    def output_size(self) -> int:
        return int(self.layer_sizes[-1])

    def params(self) -> list[np.ndarray]:
        """Flat parameter list [W0, b0, W1, b1, ...] (live views)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def bump(self) -> None:
        self.version += 1

    def copy(self) -> "Mlp":
        return Mlp(
            layer_sizes=self.layer_sizes,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            activation=self.activation,
            version=0,
        )


def mlp_init(
    layer_sizes,
    rng: np.random.Generator,
    activation: str = "tanh",
    final_scale: float = 1.0,
) -> Mlp:
    """Glorot-uniform weights, zero biases. final_scale shrinks the last
    layer so freshly built policies start near zero output."""
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ValueError("layer_sizes needs >= 2 positive entries")
    if activation not in _ACTIVATIONS:
        raise ValueError(f"activation must be one of {_ACTIVATIONS}")
    weights, biases = [], []
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        if i == len(sizes) - 2:
            limit *= final_scale
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Mlp(layer_sizes=sizes, weights=weights, biases=biases, activation=activation)


@dataclass
class MlpCache:
    inputs: list[np.ndarray]  # a_0 .. a_{L-1}: input to each layer, 2-D
    preacts: list[np.ndarray]  # z_0 .. z_{L-1}
    version: int
    squeezed: bool  # original input was 1-D
    batch: int = field(default=0)


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(z)
    return np.maximum(z, 0.0)


def _act_deriv(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return 1.0 - a * a
    return (z > 0.0).astype(np.float64)


def _as_batch(net: Mlp, x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    squeezed = arr.ndim == 1
    if squeezed:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != net.input_size:
        raise ValueError(
            f"input shape {np.asarray(x).shape} does not match network input {net.input_size}"
        )
    return arr, squeezed


def mlp_forward(net: Mlp, x) -> np.ndarray:
    """Forward pass; accepts (d,) or (n, d), returns matching shape."""
    a, squeezed = _as_batch(net, x)
    last = net.n_layers - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w.T + b
        a = z if i == last else _act(net.activation, z)
    return a[0] if squeezed else a


def mlp_forward_cached(net: Mlp, x) -> tuple[np.ndarray, MlpCache]:
    """Forward pass that records layer inputs for a later backward."""
    a, squeezed = _as_batch(net, x)
    inputs, preacts = [], []
    last = net.n_layers - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        inputs.append(a)
        z = a @ w.T + b
        preacts.append(z)
        a = z if i == last else _act(net.activation, z)
    cache = MlpCache(
        inputs=inputs,
        preacts=preacts,
        version=net.version,
        squeezed=squeezed,
        batch=a.shape[0],
    )
    return (a[0] if squeezed else a), cache


def mlp_gradient(net: Mlp, grad_output, cache: MlpCache) -> tuple[list[np.ndarray], np.ndarray]:
    """Backward pass.

    grad_output is dL/dy for the forward that produced `cache` (summed,
    not averaged, over the batch: fold any 1/n into it). Returns
    (parameter gradients matching net.params(), dL/dx).
    """
    if cache.version != net.version:
        raise ValueError(
            f"stale cache: built at version {cache.version}, network now {net.version}"
        )
    g = np.asarray(grad_output, dtype=np.float64)
    if cache.squeezed and g.ndim == 1:
        g = g[None, :]
    if g.shape != (cache.batch, net.output_size):
        raise ValueError(
            f"grad_output shape {np.asarray(grad_output).shape} does not match output"
        )
    grads: list[np.ndarray] = [np.empty(0)] * (2 * net.n_layers)
    delta = g
    for i in range(net.n_layers - 1, -1, -1):
        grads[2 * i] = delta.T @ cache.inputs[i]
        grads[2 * i + 1] = delta.sum(axis=0)
        delta = delta @ net.weights[i]
        if i > 0:
            z = cache.preacts[i - 1]
            a = _act(net.activation, z)
            delta = delta * _act_deriv(net.activation, z, a)
    grad_input = delta[0] if cache.squeezed else delta
    return grads, grad_input


def polyak_update(target: Mlp, online: Mlp, rho: float) -> None:
    """Blend the online net into the target in place:
    target <- rho * online + (1 - rho) * target. rho = 1 copies."""
    if not (0.0 <= rho <= 1.0):
        raise ValueError("rho must be in [0, 1]")
    if target.layer_sizes != online.layer_sizes:
        raise ValueError("mismatched architectures")
    for tp, op in zip(target.params(), online.params()):
        tp *= 1.0 - rho
        tp += rho * op
    target.bump()
