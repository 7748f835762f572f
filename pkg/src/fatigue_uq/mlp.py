"""Small dense-network engine: forward, exact backprop, dropout, optimizers.

Everything is plain float64 numpy. Networks are ReLU MLPs with a single
linear output; dropout (inverted scaling) follows every hidden activation.
Parameters travel either as per-layer (W, b) lists or as one flat vector,
which is what the Bayesian families and the optimizers consume.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError


@dataclass(frozen=True)
class MLPArchitecture:
    input_dim: int
    hidden: tuple[int, ...]
    dropout_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.input_dim < 1 or any(h < 1 for h in self.hidden):
            raise ValueError("layer widths must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        dims = [self.input_dim, *self.hidden, 1]
        return list(zip(dims[:-1], dims[1:]))

    @property
    def n_params(self) -> int:
        return sum(fi * fo + fo for fi, fo in self.layer_dims)


class MLP:
    """A ReLU network with one linear output unit."""

    def __init__(self, arch: MLPArchitecture, weights: list[np.ndarray], biases: list[np.ndarray]):
        self.arch = arch
        self.weights = weights
        self.biases = biases

    @classmethod
    def initialize(cls, arch: MLPArchitecture, seed: int) -> "MLP":
        """Seeded uniform init in +/- sqrt(6 / (fan_in + fan_out)) per layer."""
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        for fan_in, fan_out in arch.layer_dims:
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(arch, weights, biases)

    # --- flat parameter vector view ---------------------------------------

    def get_flat(self) -> np.ndarray:
        parts = []
        for W, b in zip(self.weights, self.biases):
            parts.append(W.ravel())
            parts.append(b)
        return np.concatenate(parts)

    def set_flat(self, theta: np.ndarray) -> None:
        i = 0
        for li, (fan_in, fan_out) in enumerate(self.arch.layer_dims):
            size = fan_in * fan_out
            self.weights[li] = theta[i : i + size].reshape(fan_in, fan_out).copy()
            i += size
            self.biases[li] = theta[i : i + fan_out].copy()
            i += fan_out

    @staticmethod
    def flatten_grads(grads: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
        parts = []
        for dW, db in grads:
            parts.append(dW.ravel())
            parts.append(db)
        return np.concatenate(parts)

    # --- forward / backward ------------------------------------------------

    def _masks(self, n_rows: int, mask_seed: int) -> list[np.ndarray]:
        rng = np.random.default_rng(mask_seed)
        keep = 1.0 - self.arch.dropout_rate
        return [
            (rng.random((n_rows, h)) < keep).astype(float) / keep for h in self.arch.hidden
        ]

    def forward(self, X: np.ndarray, mode: str = "eval", mask_seed: int | None = None):
        """Network output for a batch; returns (predictions, cache).

        ``mode="train"`` applies inverted dropout with masks generated from
        ``mask_seed``, so a fixed seed reproduces the exact same pass. Eval
        mode needs no rescaling because the scaling lives in the masks.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.arch.input_dim:
            raise DimensionMismatchError(
                f"expected {self.arch.input_dim} input features, got {X.shape[1]}"
            )
        use_dropout = mode == "train" and self.arch.dropout_rate > 0.0
        if mode not in ("train", "eval"):
            raise ValueError(f"unknown mode {mode!r}")
        if use_dropout:
            if mask_seed is None:
                raise ValueError("train mode with dropout requires a mask_seed")
            masks = self._masks(X.shape[0], mask_seed)
        else:
            masks = [None] * len(self.arch.hidden)

        h = X
        inputs, pre_acts = [], []
        n_hidden = len(self.arch.hidden)
        for li in range(n_hidden):
            inputs.append(h)
            z = h @ self.weights[li] + self.biases[li]
            pre_acts.append(z)
            h = np.maximum(z, 0.0)
            if masks[li] is not None:
                h = h * masks[li]
        inputs.append(h)
        out = (h @ self.weights[-1] + self.biases[-1]).ravel()
        cache = (inputs, pre_acts, masks)
        return out, cache

    def predict(self, X: np.ndarray) -> np.ndarray:
        out, _ = self.forward(X, mode="eval")
        return out

    def backward(self, cache, dout: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        """Exact gradients of sum_i dout_i * f(x_i) w.r.t. every parameter.

        ``dout`` is the loss gradient with respect to each prediction. The
        returned list matches the layer order of ``weights``/``biases``.
        """
        inputs, pre_acts, masks = cache
        delta = np.asarray(dout, dtype=float).reshape(-1, 1)
        grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(self.weights)
        grads[-1] = (inputs[-1].T @ delta, delta.sum(axis=0))
        back = delta @ self.weights[-1].T
        for li in range(len(self.arch.hidden) - 1, -1, -1):
            if masks[li] is not None:
                back = back * masks[li]
            back = back * (pre_acts[li] > 0.0)
            grads[li] = (inputs[li].T @ back, back.sum(axis=0))
            if li > 0:
                back = back @ self.weights[li].T
        return grads


# --- optimizers -------------------------------------------------------------


@dataclass(frozen=True)
class Adam:
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")


@dataclass(frozen=True)
class SGDNesterov:
    learning_rate: float = 0.001
    momentum: float = 0.9

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")


OptimizerSpec = Adam | SGDNesterov


class _AdamState:
    def __init__(self, spec: Adam, dim: int):
        self.spec = spec
        self.m = np.zeros(dim)
        self.v = np.zeros(dim)
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        s = self.spec
        self.t += 1
        self.m = s.beta1 * self.m + (1.0 - s.beta1) * grad
        self.v = s.beta2 * self.v + (1.0 - s.beta2) * grad**2
        m_hat = self.m / (1.0 - s.beta1**self.t)
        v_hat = self.v / (1.0 - s.beta2**self.t)
        return theta - s.learning_rate * m_hat / (np.sqrt(v_hat) + s.epsilon)


class _NesterovState:
    # the common deep-learning formulation: look-ahead applied to the gradient
    def __init__(self, spec: SGDNesterov, dim: int):
        self.spec = spec
        self.buf = np.zeros(dim)

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        s = self.spec
        self.buf = s.momentum * self.buf + grad
        return theta - s.learning_rate * (grad + s.momentum * self.buf)


def make_optimizer(spec: OptimizerSpec, dim: int):
    if isinstance(spec, Adam):
        return _AdamState(spec, dim)
    if isinstance(spec, SGDNesterov):
        return _NesterovState(spec, dim)
    raise TypeError(f"unknown optimizer spec {type(spec).__name__}")
