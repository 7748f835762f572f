"""Exact Gaussian process regression with an RBF kernel.

The posterior is computed through a lower-triangular factorization of the
noisy kernel matrix; predictive variance includes the observation noise. Targets
are centered on the training mean, which plays the role of the prior mean.
An optional deterministic grid search maximizes the log marginal likelihood
over candidate hyperparameter triples, breaking ties toward the smoothest
(largest length scale) model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

from .contract import FittedModel, ModelSpec, PredictiveDistribution, gaussian_interval
from .data import Dataset
from .errors import InvalidSpecError, NotPositiveDefiniteError


@dataclass(frozen=True)
class GPRGrid:
    """Log-spaced candidate sets for the grid search."""

    length_scales: tuple[float, ...]
    signal_variances: tuple[float, ...]
    noise_variances: tuple[float, ...]

    def __post_init__(self):
        for name in ("length_scales", "signal_variances", "noise_variances"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals or any(v <= 0 for v in vals):
                raise InvalidSpecError(f"{name} must be non-empty and positive")
            object.__setattr__(self, name, vals)


@dataclass(frozen=True)
class GPRSpec:
    length_scale: float = 1.0
    signal_variance: float = 1.0
    noise_variance: float = 1e-2
    jitter: float = 1e-8
    grid: GPRGrid | None = None

    def __post_init__(self):
        if self.length_scale <= 0 or self.signal_variance <= 0 or self.noise_variance <= 0:
            raise InvalidSpecError("length scale and variances must be positive")
        if self.jitter <= 0:
            raise InvalidSpecError("jitter must be positive")


def rbf_kernel(a: np.ndarray, b: np.ndarray, length_scale: float, signal_variance: float) -> np.ndarray:
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    sq = (
        np.sum(a**2, axis=1)[:, None]
        + np.sum(b**2, axis=1)[None, :]
        - 2.0 * a @ b.T
    )
    np.maximum(sq, 0.0, out=sq)
    return signal_variance * np.exp(-sq / (2.0 * length_scale**2))


def _factorize(K: np.ndarray, noise: float, jitter: float) -> tuple[np.ndarray, float]:
    """Lower Cholesky of K + (noise + jitter) I with jitter escalation."""
    j = jitter
    while True:
        try:
            L = cholesky(K + (noise + j) * np.eye(K.shape[0]), lower=True)
            return L, j
        except np.linalg.LinAlgError:
            j *= 10.0
            if j > 1e-4:
                raise NotPositiveDefiniteError(
                    "kernel matrix not positive definite even with jitter 1e-4"
                ) from None


def log_marginal_likelihood(L: np.ndarray, alpha: np.ndarray, y_centered: np.ndarray) -> float:
    n = y_centered.shape[0]
    return float(
        -0.5 * y_centered @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * math.log(2.0 * math.pi)
    )


class FittedGPR(FittedModel):
    def __init__(self, spec, feature_names, params: GPRSpec, X, y):
        super().__init__(spec, feature_names)
        self.params = params
        self.X = X
        self.y_mean = float(y.mean())
        yc = y - self.y_mean
        K = rbf_kernel(X, X, params.length_scale, params.signal_variance)
        self.L, used_jitter = _factorize(K, params.noise_variance, params.jitter)
        self.alpha = cho_solve((self.L, True), yc)
        self.lml = log_marginal_likelihood(self.L, self.alpha, yc)
        self.diagnostics = {
            "log_marginal_likelihood": self.lml,
            "jitter": used_jitter,
            "length_scale": params.length_scale,
            "signal_variance": params.signal_variance,
            "noise_variance": params.noise_variance,
        }

    def posterior(self, X_test: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Predictive mean and variance (including observation noise)."""
        p = self.params
        K_star = rbf_kernel(self.X, X_test, p.length_scale, p.signal_variance)
        mean = K_star.T @ self.alpha + self.y_mean
        v = solve_triangular(self.L, K_star, lower=True)
        var_f = p.signal_variance - np.sum(v**2, axis=0)
        var = np.maximum(var_f, 0.0) + p.noise_variance
        return mean, var

    def _predict_features(self, X: np.ndarray) -> PredictiveDistribution:
        mean, var = self.posterior(X)
        return gaussian_interval(mean, np.sqrt(var), self.spec.interval_multiplier)


def gpr_fit(train: Dataset, spec: ModelSpec) -> FittedGPR:
    X, y = train.features(), train.target()
    params: GPRSpec = spec.params
    names = train.schema.feature_names
    if params.grid is None:
        return FittedGPR(spec, names, params, X, y)
    best = None
    for ls in params.grid.length_scales:
        for sv in params.grid.signal_variances:
            for nv in params.grid.noise_variances:
                cand = replace(params, length_scale=ls, signal_variance=sv, noise_variance=nv)
                model = FittedGPR(spec, names, cand, X, y)
                key = (model.lml, ls)  # ties prefer the larger length scale
                if best is None or key > best[0]:
                    best = (key, model)
    return best[1]
