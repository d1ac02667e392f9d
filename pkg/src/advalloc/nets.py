"""Small feed-forward nets with softmax heads, written directly in numpy.

The pricing policy encodes the padded feature history with one shared affine
layer plus a per-slot bias matrix, concatenates the current slot's features,
and runs a few dense leaky-rectifier layers into a softmax over prices. The
budget generator maps a Gaussian latent through dense layers into one softmax
head per slot over the budget set.

Backprop starts from externally supplied gradients on the output
probabilities (the objective is always sum_a g_a * P_a here), so no loss
classes exist. Parameters and their gradients travel as flat lists of arrays
in one canonical order per policy; tapes are invalidated by any step().
"""
from __future__ import annotations

import dataclasses
from typing import Sequence

import numpy as np

N_STEP_FEATURES = 4   # scaled index, scaled availability, last budget, last price
DEFAULT_SLOPE = 0.01


class StaleTapeError(RuntimeError):
    """Tape predates a parameter update and would give wrong gradients."""


def leaky(z: np.ndarray, slope: float) -> np.ndarray:
    return np.where(z > 0, z, slope * z)


def leaky_grad(z: np.ndarray, slope: float) -> np.ndarray:
    return np.where(z > 0, 1.0, slope)


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int,
                   shape: tuple[int, ...]) -> np.ndarray:
    s = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-s, s, size=shape)


def softmax_heads(z: np.ndarray, head_sizes: Sequence[int]) -> np.ndarray:
    """Row-wise softmax applied independently per contiguous head block."""
    out = np.empty_like(z)
    start = 0
    for size in head_sizes:
        block = z[..., start:start + size]
        shifted = block - block.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        out[..., start:start + size] = e / e.sum(axis=-1, keepdims=True)
        start += size
    return out


def sample_categorical(rng: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    """Inverse-CDF sampling along the last axis; zero-probability actions
    are never drawn (their CDF interval is empty)."""
    cdf = np.cumsum(probs, axis=-1)
    cdf = cdf / cdf[..., -1:]
    u = rng.random(size=probs.shape[:-1] + (1,))
    return (cdf <= u).sum(axis=-1)


def add_grads(acc: list[np.ndarray] | None, grads: list[np.ndarray]) -> list[np.ndarray]:
    if acc is None:
        return [g.copy() for g in grads]
    for a, g in zip(acc, grads):
        a += g
    return acc


def scale_grads(grads: list[np.ndarray], factor: float) -> list[np.ndarray]:
    for g in grads:
        g *= factor
    return grads


def clip_grads(grads: list[np.ndarray], max_norm: float) -> list[np.ndarray]:
    total = np.sqrt(sum(float(np.square(g).sum()) for g in grads))
    if total > max_norm > 0:
        scale_grads(grads, max_norm / total)
    return grads


@dataclasses.dataclass
class MlpTape:
    version: int
    x: np.ndarray
    pre_acts: list[np.ndarray]    # z per layer
    activations: list[np.ndarray]  # input plus post-activation per hidden layer
    probs: np.ndarray


class SoftmaxMlp:
    """Dense layers with leaky-rectifier hidden activations and softmax heads."""

    def __init__(self, layer_sizes: Sequence[int], head_sizes: Sequence[int], *,
                 slope: float = DEFAULT_SLOPE, rng: np.random.Generator | None = None):
        layer_sizes = tuple(int(s) for s in layer_sizes)
        head_sizes = tuple(int(s) for s in head_sizes)
        if len(layer_sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if any(s < 1 for s in layer_sizes) or any(s < 1 for s in head_sizes):
            raise ValueError("all sizes must be positive")
        if sum(head_sizes) != layer_sizes[-1]:
            raise ValueError(f"heads {head_sizes} do not tile output {layer_sizes[-1]}")
        self.layer_sizes = layer_sizes
        self.head_sizes = head_sizes
        self.slope = float(slope)
        self.version = 0
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
            if rng is None:
                w = np.zeros((fan_in, fan_out))
            else:
                w = glorot_uniform(rng, fan_in, fan_out, (fan_in, fan_out))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, MlpTape]:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.layer_sizes[0]:
            raise ValueError(f"input width {x.shape[1]} != {self.layer_sizes[0]}")
        activations = [x]
        pre_acts = []
        h = x
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            pre_acts.append(z)
            if k < last:
                h = leaky(z, self.slope)
                activations.append(h)
        probs = softmax_heads(pre_acts[-1], self.head_sizes)
        return probs, MlpTape(version=self.version, x=x, pre_acts=pre_acts,
                              activations=activations, probs=probs)

    def backprop(self, tape: MlpTape, grad_probs: np.ndarray, *,
                 return_input_grad: bool = False):
        """Gradient of sum_{batch, action} grad_probs * P w.r.t. parameters.

        With return_input_grad the gradient on the input batch comes back too,
        so wrappers can keep propagating into an upstream encoder.
        """
        if tape.version != self.version:
            raise StaleTapeError("parameters changed since this forward pass")
        grad_probs = np.atleast_2d(np.asarray(grad_probs, dtype=np.float64))
        if grad_probs.shape != tape.probs.shape:
            raise ValueError(f"grad shape {grad_probs.shape} != {tape.probs.shape}")
        dz = np.empty_like(tape.probs)
        start = 0
        for size in self.head_sizes:
            p = tape.probs[:, start:start + size]
            g = grad_probs[:, start:start + size]
            inner = (g * p).sum(axis=1, keepdims=True)
            dz[:, start:start + size] = p * (g - inner)
            start += size
        grads: list[np.ndarray] = []
        for k in range(len(self.weights) - 1, -1, -1):
            a_prev = tape.activations[k]
            grads.append(dz.sum(axis=0))        # bias
            grads.append(a_prev.T @ dz)          # weight
            if k > 0:
                da = dz @ self.weights[k].T
                dz = da * leaky_grad(tape.pre_acts[k - 1], self.slope)
        grads.reverse()
        if return_input_grad:
            return grads, dz @ self.weights[0].T
        return grads

    def step(self, grads: list[np.ndarray], lr: float) -> None:
        """Plain gradient ascent; invalidates existing tapes."""
        params = self.params
        if len(grads) != len(params):
            raise ValueError(f"got {len(grads)} grad arrays, expected {len(params)}")
        for p, g in zip(params, grads):
            if p.shape != g.shape:
                raise ValueError(f"grad shape {g.shape} != param shape {p.shape}")
            p += lr * g
        self.version += 1


@dataclasses.dataclass
class EncoderTape:
    version: int
    history: np.ndarray
    pre_act: np.ndarray


class HistoryEncoder:
    """Shared affine map plus per-slot bias over the padded feature history.

    flatten(leaky(history @ W + B)) with history (batch, n_slots, n_features);
    unfilled future rows stay zero-padded so the output width is static.
    """

    def __init__(self, n_slots: int, width: int, *, n_features: int = N_STEP_FEATURES,
                 slope: float = DEFAULT_SLOPE, rng: np.random.Generator | None = None):
        if n_slots < 0 or width < 1 or n_features < 1:
            raise ValueError("bad encoder dimensions")
        self.n_slots = int(n_slots)
        self.width = int(width)
        self.n_features = int(n_features)
        self.slope = float(slope)
        self.version = 0
        if rng is None:
            self.weight = np.zeros((n_features, width))
        else:
            self.weight = glorot_uniform(rng, n_features, width, (n_features, width))
        self.bias = np.zeros((n_slots, width))

    @property
    def out_width(self) -> int:
        return self.n_slots * self.width

    @property
    def params(self) -> list[np.ndarray]:
        return [self.weight, self.bias]

    def forward(self, history: np.ndarray) -> tuple[np.ndarray, EncoderTape]:
        history = np.asarray(history, dtype=np.float64)
        if history.ndim == 2:
            history = history[None]
        if history.shape[1:] != (self.n_slots, self.n_features):
            raise ValueError(
                f"history shape {history.shape[1:]} != {(self.n_slots, self.n_features)}")
        z = history @ self.weight + self.bias
        flat = leaky(z, self.slope).reshape(history.shape[0], self.out_width)
        # copy: callers often reuse one history buffer across steps
        return flat, EncoderTape(version=self.version, history=history.copy(), pre_act=z)

    def backprop(self, tape: EncoderTape, grad_flat: np.ndarray) -> list[np.ndarray]:
        if tape.version != self.version:
            raise StaleTapeError("parameters changed since this forward pass")
        batch = tape.history.shape[0]
        dz = grad_flat.reshape(batch, self.n_slots, self.width)
        dz = dz * leaky_grad(tape.pre_act, self.slope)
        d_weight = np.einsum("brf,brw->fw", tape.history, dz)
        d_bias = dz.sum(axis=0)
        return [d_weight, d_bias]

    def step(self, grads: list[np.ndarray], lr: float) -> None:
        self.weight += lr * grads[0]
        self.bias += lr * grads[1]
        self.version += 1


@dataclasses.dataclass
class AlgTape:
    version: int
    enc_tape: EncoderTape
    mlp_tape: MlpTape


class AlgorithmPolicy:
    """Posted-price policy: history encoder feeding dense layers, one price head."""

    def __init__(self, n_users: int, n_prices: int, *, hidden: Sequence[int] = (64, 64, 64),
                 encoder_width: int = 8, slope: float = DEFAULT_SLOPE,
                 rng: np.random.Generator | None = None):
        if n_users < 1 or n_prices < 1:
            raise ValueError("need at least one user and one price")
        self.n_users = int(n_users)
        self.n_prices = int(n_prices)
        self.slope = float(slope)
        self.version = 0
        self.encoder = HistoryEncoder(n_users - 1, encoder_width, slope=slope, rng=rng)
        in_width = self.encoder.out_width + N_STEP_FEATURES
        sizes = (in_width, *hidden, n_prices)
        self.mlp = SoftmaxMlp(sizes, (n_prices,), slope=slope, rng=rng)

    @property
    def params(self) -> list[np.ndarray]:
        return self.encoder.params + self.mlp.params

    def get_params(self) -> list[np.ndarray]:
        return [p.copy() for p in self.params]

    def set_params(self, arrays: Sequence[np.ndarray]) -> None:
        params = self.params
        if len(arrays) != len(params):
            raise ValueError(f"got {len(arrays)} arrays, expected {len(params)}")
        for p, a in zip(params, arrays):
            if p.shape != a.shape:
                raise ValueError(f"shape {a.shape} != expected {p.shape}")
            p[...] = a
        self.version += 1
        self.encoder.version += 1
        self.mlp.version += 1

    def forward(self, history: np.ndarray, current: np.ndarray) -> tuple[np.ndarray, AlgTape]:
        current = np.atleast_2d(np.asarray(current, dtype=np.float64))
        flat, enc_tape = self.encoder.forward(history)
        x = np.concatenate([flat, current], axis=1)
        probs, mlp_tape = self.mlp.forward(x)
        return probs, AlgTape(version=self.version, enc_tape=enc_tape, mlp_tape=mlp_tape)

    def backprop(self, tape: AlgTape, grad_probs: np.ndarray) -> list[np.ndarray]:
        if tape.version != self.version:
            raise StaleTapeError("parameters changed since this forward pass")
        mlp_grads, dx = self.mlp.backprop(tape.mlp_tape, grad_probs,
                                          return_input_grad=True)
        enc_grads = self.encoder.backprop(tape.enc_tape, dx[:, : self.encoder.out_width])
        return enc_grads + mlp_grads

    def step(self, grads: list[np.ndarray], lr: float) -> None:
        self.encoder.step(grads[:2], lr)
        self.mlp.step(grads[2:], lr)
        self.version += 1

    def zero_grads(self) -> list[np.ndarray]:
        return [np.zeros_like(p) for p in self.params]


@dataclasses.dataclass
class AdvTape:
    version: int
    mlp_tape: MlpTape


class AdversaryPolicy:
    """Budget-sequence generator: latent vector to one budget head per slot."""

    def __init__(self, n_users: int, n_budgets: int, *, latent_dim: int = 16,
                 hidden: Sequence[int] = (64, 64, 64, 64), slope: float = DEFAULT_SLOPE,
                 rng: np.random.Generator | None = None):
        if n_users < 1 or n_budgets < 1 or latent_dim < 1:
            raise ValueError("need positive dimensions")
        self.n_users = int(n_users)
        self.n_budgets = int(n_budgets)
        self.latent_dim = int(latent_dim)
        self.slope = float(slope)
        self.version = 0
        sizes = (latent_dim, *hidden, n_users * n_budgets)
        self.mlp = SoftmaxMlp(sizes, (n_budgets,) * n_users, slope=slope, rng=rng)

    @property
    def params(self) -> list[np.ndarray]:
        return self.mlp.params

    def get_params(self) -> list[np.ndarray]:
        return [p.copy() for p in self.params]

    def set_params(self, arrays: Sequence[np.ndarray]) -> None:
        params = self.params
        if len(arrays) != len(params):
            raise ValueError(f"got {len(arrays)} arrays, expected {len(params)}")
        for p, a in zip(params, arrays):
            if p.shape != a.shape:
                raise ValueError(f"shape {a.shape} != expected {p.shape}")
            p[...] = a
        self.version += 1
        self.mlp.version += 1

    def forward(self, latents: np.ndarray) -> tuple[np.ndarray, AdvTape]:
        latents = np.atleast_2d(np.asarray(latents, dtype=np.float64))
        flat, tape = self.mlp.forward(latents)
        probs = flat.reshape(latents.shape[0], self.n_users, self.n_budgets)
        return probs, AdvTape(version=self.version, mlp_tape=tape)

    def backprop(self, tape: AdvTape, grad_probs: np.ndarray) -> list[np.ndarray]:
        if tape.version != self.version:
            raise StaleTapeError("parameters changed since this forward pass")
        grad_probs = np.asarray(grad_probs, dtype=np.float64)
        flat = grad_probs.reshape(grad_probs.shape[0], self.n_users * self.n_budgets)
        return self.mlp.backprop(tape.mlp_tape, flat)

    def step(self, grads: list[np.ndarray], lr: float) -> None:
        self.mlp.step(grads, lr)
        self.version += 1

    def zero_grads(self) -> list[np.ndarray]:
        return [np.zeros_like(p) for p in self.params]
