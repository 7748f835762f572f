"""Deterministic-parameter network families: point NN, deep ensemble, MC dropout.

All three share the numpy MLP engine and full-batch training; datasets here
are a few hundred rows, so batching adds nondeterminism without speed. The
point network reports a degenerate interval (std 0), the ensemble spreads
over member predictions, and MC dropout samples stochastic forward passes
with dropout left on at inference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contract import FittedModel, ModelSpec, PredictiveDistribution, gaussian_interval
from .data import Dataset
from .errors import InvalidSpecError, NoMembersError, NonFiniteLossError, NoSamplesError
from .mlp import MLP, Adam, MLPArchitecture, OptimizerSpec, make_optimizer
from .piml import PhysicsLossSpec, physics_loss


def mse_loss(y_true: np.ndarray, y_pred: np.ndarray) -> tuple[float, np.ndarray]:
    err = y_pred - y_true
    return float(np.mean(err**2)), 2.0 * err / err.size


def make_loss(loss):
    """Map a ModelSpec loss field to a (value, grad_wrt_pred) callable."""
    if loss == "mse":
        return mse_loss
    if isinstance(loss, PhysicsLossSpec):
        return lambda y_true, y_pred: physics_loss(y_true, y_pred, loss)
    raise InvalidSpecError(f"unknown loss {loss!r}")


def train_mlp(
    net: MLP,
    X: np.ndarray,
    y: np.ndarray,
    loss_fn,
    optimizer_spec: OptimizerSpec,
    epochs: int,
    seed: int,
) -> list[float]:
    """Full-batch gradient training; returns the per-epoch loss trajectory.

    Dropout masks are drawn from a stream seeded once, so the whole run is a
    pure function of (initial weights, data, optimizer, seed).
    """
    mask_rng = np.random.default_rng(np.random.default_rng(seed).integers(2**63))
    opt = make_optimizer(optimizer_spec, net.arch.n_params)
    trajectory = []
    theta = net.get_flat()
    for epoch in range(epochs):
        if net.arch.dropout_rate > 0.0:
            out, cache = net.forward(X, mode="train", mask_seed=int(mask_rng.integers(2**63)))
        else:
            out, cache = net.forward(X, mode="eval")
        loss, dout = loss_fn(y, out)
        if not np.isfinite(loss):
            raise NonFiniteLossError(f"training loss diverged at epoch {epoch}")
        trajectory.append(loss)
        grads = MLP.flatten_grads(net.backward(cache, dout))
        theta = opt.step(theta, grads)
        if not np.all(np.isfinite(theta)):
            raise NonFiniteLossError(f"parameters diverged at epoch {epoch}")
        net.set_flat(theta)
    return trajectory


@dataclass(frozen=True)
class NNSpec:
    """Point-estimate network; reports no uncertainty."""

    hidden: tuple[int, ...] = (1000, 200, 40)
    dropout_rate: float = 0.0
    optimizer: OptimizerSpec = Adam(learning_rate=0.01)
    epochs: int = 5000

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(self.hidden))
        if self.epochs < 0:
            raise InvalidSpecError("epochs must be >= 0")


@dataclass(frozen=True)
class DeepEnsembleSpec:
    """Independently initialized members; spread of predictions is the spread."""

    n_members: int = 5
    hidden: tuple[int, ...] = (10, 10, 10)
    dropout_rate: float = 0.5
    optimizer: OptimizerSpec = Adam(learning_rate=0.01)
    epochs: int = 2000

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(self.hidden))
        if self.n_members < 1:
            raise InvalidSpecError("n_members must be >= 1")
        if self.epochs < 0:
            raise InvalidSpecError("epochs must be >= 0")


@dataclass(frozen=True)
class MCDropoutSpec:
    """Single network, dropout active at inference for Monte Carlo samples."""

    n_samples: int = 1000
    hidden: tuple[int, ...] = (10, 10, 10)
    dropout_rate: float = 0.5
    optimizer: OptimizerSpec = Adam(learning_rate=0.01)
    epochs: int = 2000

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(self.hidden))
        if self.n_samples < 1:
            raise InvalidSpecError("n_samples must be >= 1")
        if self.epochs < 0:
            raise InvalidSpecError("epochs must be >= 0")


class FittedPointNN(FittedModel):
    def __init__(self, spec, feature_names, net, trajectory):
        super().__init__(spec, feature_names)
        self.net = net
        self.diagnostics = {"final_train_loss": trajectory[-1] if trajectory else None}

    def _predict_features(self, X: np.ndarray) -> PredictiveDistribution:
        mean = self.net.predict(X)
        zero = np.zeros_like(mean)
        return PredictiveDistribution(mean=mean, std=zero, lower=mean, upper=mean)


def nn_fit(train: Dataset, spec: ModelSpec) -> FittedPointNN:
    params: NNSpec = spec.params
    X, y = train.features(), train.target()
    arch = MLPArchitecture(X.shape[1], params.hidden, params.dropout_rate)
    net = MLP.initialize(arch, spec.seed)
    traj = train_mlp(net, X, y, make_loss(spec.loss), params.optimizer, params.epochs, spec.seed)
    return FittedPointNN(spec, train.schema.feature_names, net, traj)


class FittedDeepEnsemble(FittedModel):
    def __init__(self, spec, feature_names, members):
        super().__init__(spec, feature_names)
        self.members = members

    def _predict_features(self, X: np.ndarray) -> PredictiveDistribution:
        return ensemble_predict(self.members, X, self.spec.interval_multiplier)


def ensemble_predict(members: list[MLP], X: np.ndarray, z: float) -> PredictiveDistribution:
    """Mean and population spread of member predictions, interval mean +/- z*std."""
    if not members:
        raise NoMembersError("ensemble has no trained members")
    preds = np.stack([m.predict(X) for m in members])
    return gaussian_interval(
        preds.mean(axis=0), preds.std(axis=0), z, samples_available=True
    )


def deep_ensemble_fit(train: Dataset, spec: ModelSpec) -> FittedDeepEnsemble:
    params: DeepEnsembleSpec = spec.params
    X, y = train.features(), train.target()
    arch = MLPArchitecture(X.shape[1], params.hidden, params.dropout_rate)
    loss_fn = make_loss(spec.loss)
    members = []
    for i in range(params.n_members):
        member_seed = spec.seed + i
        net = MLP.initialize(arch, member_seed)
        train_mlp(net, X, y, loss_fn, params.optimizer, params.epochs, member_seed)
        members.append(net)
    return FittedDeepEnsemble(spec, train.schema.feature_names, members)


class FittedMCDropout(FittedModel):
    def __init__(self, spec, feature_names, net, trajectory):
        super().__init__(spec, feature_names)
        self.net = net
        self.diagnostics = {"final_train_loss": trajectory[-1] if trajectory else None}

    def _predict_features(self, X: np.ndarray) -> PredictiveDistribution:
        return mc_dropout_predict(
            self.net, X, self.spec.params, self.spec.interval_multiplier, self.spec.seed
        )


def mc_dropout_predict(
    net: MLP, X: np.ndarray, params: MCDropoutSpec, z: float, seed: int
) -> PredictiveDistribution:
    """Stochastic forward passes with dropout active; deterministic per seed."""
    if params.n_samples < 1:
        raise NoSamplesError("n_samples must be >= 1")
    rng = np.random.default_rng(seed + 0x5EED)
    samples = np.empty((params.n_samples, X.shape[0]))
    for s in range(params.n_samples):
        if net.arch.dropout_rate > 0.0:
            out, _ = net.forward(X, mode="train", mask_seed=int(rng.integers(2**63)))
        else:
            out, _ = net.forward(X, mode="eval")
        samples[s] = out
    return gaussian_interval(
        samples.mean(axis=0), samples.std(axis=0), z, samples_available=True
    )


def mc_dropout_fit(train: Dataset, spec: ModelSpec) -> FittedMCDropout:
    params: MCDropoutSpec = spec.params
    X, y = train.features(), train.target()
    arch = MLPArchitecture(X.shape[1], params.hidden, params.dropout_rate)
    net = MLP.initialize(arch, spec.seed)
    traj = train_mlp(net, X, y, make_loss(spec.loss), params.optimizer, params.epochs, spec.seed)
    return FittedMCDropout(spec, train.schema.feature_names, net, traj)
