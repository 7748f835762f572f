"""Uniform interface over all model families.

Every family consumes a preprocessed dataset (features scaled to the unit
range on the training split, target as log10 cycles) and produces a
:class:`PredictiveDistribution` with one row per test row. A
:class:`ModelSpec` pairs a family-specific parameter object with the shared
training controls: the seed, the loss for gradient-trained families, and the
interval multiplier.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .data import Dataset
from .errors import EmptyTrainingSetError, SchemaMismatchError, UnsupportedLossError
from .piml import PhysicsLossSpec


@dataclass(frozen=True)
class PredictiveDistribution:
    """Per-row point estimates and uncertainty intervals in log10 life space.

    ``std`` is zero and the interval degenerate for point-only families.
    For Gaussian-form families the interval is mean +/- z * std.
    """

    mean: np.ndarray
    std: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float = 0.95
    samples_available: bool = False

    def __post_init__(self):
        arrs = {}
        for name in ("mean", "std", "lower", "upper"):
            a = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            arrs[name] = a
            object.__setattr__(self, name, a)
        n = arrs["mean"].shape[0]
        if any(a.shape != (n,) for a in arrs.values()):
            raise ValueError("mean, std, lower, upper must share one length")
        if n == 0:
            return
        if np.any(arrs["std"] < 0):
            raise ValueError("std must be non-negative")
        if np.any(arrs["lower"] > arrs["mean"]) or np.any(arrs["mean"] > arrs["upper"]):
            raise ValueError("interval ordering violated: need lower <= mean <= upper")

    def __len__(self) -> int:
        return self.mean.shape[0]


def gaussian_interval(mean, std, z: float, level: float = 0.95,
                      samples_available: bool = False) -> PredictiveDistribution:
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    std = np.atleast_1d(np.asarray(std, dtype=float))
    return PredictiveDistribution(
        mean=mean,
        std=std,
        lower=mean - z * std,
        upper=mean + z * std,
        level=level,
        samples_available=samples_available,
    )


@dataclass(frozen=True)
class ModelSpec:
    """A model family plus the shared training controls.

    ``params`` is one of the family parameter dataclasses (QRSpec,
    NGBoostSpec, GPRSpec, NNSpec, DeepEnsembleSpec, MCDropoutSpec, VISpec,
    MCMCSpec). ``loss`` is "mse" or a :class:`PhysicsLossSpec`; the physics
    loss is only accepted by gradient-trained families (it shapes the log
    likelihood for the MCMC family). ``interval_multiplier`` is the z in
    mean +/- z * std for Gaussian-form intervals; 1.96 targets nominal 95%
    coverage.
    """

    params: Any
    seed: int = 0
    loss: str | PhysicsLossSpec = "mse"
    interval_multiplier: float = 1.96
    name: str | None = None

    def __post_init__(self):
        if isinstance(self.loss, str) and self.loss != "mse":
            raise ValueError(f"unknown loss {self.loss!r}; use 'mse' or a PhysicsLossSpec")
        if self.interval_multiplier < 0:
            raise ValueError("interval_multiplier must be >= 0")

    @property
    def family(self) -> str:
        return type(self.params).__name__.removesuffix("Spec").lower()


class FittedModel:
    """Base for fitted families: remembers the training feature layout."""

    def __init__(self, spec: ModelSpec, feature_names: tuple[str, ...]):
        self.spec = spec
        self.feature_names = feature_names
        self.diagnostics: dict = {}

    def predict(self, test: Dataset) -> PredictiveDistribution:
        if test.schema.feature_names != self.feature_names:
            raise SchemaMismatchError(
                f"model fitted on features {self.feature_names}, "
                f"got {test.schema.feature_names}"
            )
        X = test.features()
        if X.shape[0] == 0:
            empty = np.empty(0)
            return PredictiveDistribution(empty, empty, empty, empty)
        return self._predict_features(X)

    def _predict_features(self, X: np.ndarray) -> PredictiveDistribution:
        raise NotImplementedError


def _family_registry():
    from . import bayesian, boosting, gpr, neural

    return {
        boosting.QRSpec: (boosting.qr_fit, False),
        boosting.NGBoostSpec: (boosting.ngboost_fit, False),
        gpr.GPRSpec: (gpr.gpr_fit, False),
        neural.NNSpec: (neural.nn_fit, True),
        neural.DeepEnsembleSpec: (neural.deep_ensemble_fit, True),
        neural.MCDropoutSpec: (neural.mc_dropout_fit, True),
        bayesian.VISpec: (bayesian.vi_fit, True),
        bayesian.MCMCSpec: (bayesian.mcmc_fit, True),
    }


def provides_intervals(spec: ModelSpec) -> bool:
    """False for the point-only plain network family."""
    from .neural import NNSpec

    return not isinstance(spec.params, NNSpec)


def fit(spec: ModelSpec, train: Dataset) -> FittedModel:
    """Train one model family on a preprocessed dataset.

    Deterministic: the same (spec, train) pair always produces a model with
    identical predictions. Expects features already scaled and the target in
    log10 space; this is the caller's contract (the cross-validation harness
    does both).
    """
    if train.n_rows == 0:
        raise EmptyTrainingSetError(f"cannot fit {spec.family} on an empty training set")
    registry = _family_registry()
    entry = registry.get(type(spec.params))
    if entry is None:
        raise TypeError(f"unknown model family parameters: {type(spec.params).__name__}")
    fit_fn, gradient_trained = entry
    if isinstance(spec.loss, PhysicsLossSpec) and not gradient_trained:
        raise UnsupportedLossError(
            f"{spec.family} is not trained by explicit gradients; physics loss unsupported"
        )
    return fit_fn(train, spec)


def predict(model: FittedModel, test: Dataset) -> PredictiveDistribution:
    """Predict a fitted model on a test dataset (target column optional)."""
    return model.predict(test)
