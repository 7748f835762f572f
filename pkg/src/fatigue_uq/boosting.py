"""Gradient-boosted quantile regression and natural-gradient boosting.

Both families boost depth-limited CART trees. The quantile ensembles train
one booster per requested quantile on the pinball loss, with leaf values
re-estimated as the leaf's empirical residual quantile so the training loss
never increases. The probabilistic booster models a per-row Normal
distribution through its (mean, log-scale) parameters, stepping along the
Fisher-preconditioned gradient of the negative log likelihood with a
halving line search that enforces monotone training NLL.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contract import FittedModel, ModelSpec, PredictiveDistribution, gaussian_interval
from .data import Dataset
from .errors import DegenerateVarianceError, InvalidSpecError
from .trees import RegressionTree


def empirical_quantile(y, tau: float) -> float:
    """Sort-and-index quantile: the ceil(tau * n)-th order statistic.

    This is a minimizer of the mean pinball loss at level tau.
    """
    ys = np.sort(np.asarray(y, dtype=float))
    n = ys.size
    if n == 0:
        raise ValueError("quantile of empty vector")
    idx = min(max(math.ceil(tau * n) - 1, 0), n - 1)
    return float(ys[idx])


def pinball_loss(y, pred, tau: float) -> float:
    """Mean pinball (check) loss; at tau = 0.5 this is half the MAE."""
    diff = np.asarray(y, dtype=float) - np.asarray(pred, dtype=float)
    return float(np.mean(np.where(diff >= 0, tau * diff, (tau - 1.0) * diff)))


@dataclass(frozen=True)
class QRSpec:
    """Quantile regression via boosted trees, one ensemble per quantile."""

    quantiles: tuple[float, float, float] = (0.025, 0.5, 0.975)
    n_stages: int = 200
    learning_rate: float = 0.05
    max_depth: int = 3
    min_samples_leaf: int = 5

    def __post_init__(self):
        qs = tuple(self.quantiles)
        object.__setattr__(self, "quantiles", qs)
        if len(qs) != 3 or not all(0 < q < 1 for q in qs) or list(qs) != sorted(set(qs)):
            raise InvalidSpecError(f"quantiles must be 3 strictly increasing values in (0,1), got {qs}")
        if self.n_stages < 0 or not 0 < self.learning_rate <= 1:
            raise InvalidSpecError("need n_stages >= 0 and learning_rate in (0, 1]")


class _QuantileBooster:
    """One boosted ensemble for a single quantile level."""

    def __init__(self, tau: float, spec: QRSpec):
        self.tau = tau
        self.spec = spec
        self.f0 = 0.0
        self.trees: list[RegressionTree] = []
        self.train_loss_path: list[float] = []

    def fit(self, X: np.ndarray, y: np.ndarray):
        tau, spec = self.tau, self.spec
        self.f0 = empirical_quantile(y, tau)
        pred = np.full(y.shape[0], self.f0)
        self.train_loss_path = [pinball_loss(y, pred, tau)]
        for _ in range(spec.n_stages):
            resid = y - pred
            grad = np.where(resid > 0, tau, tau - 1.0)  # negative pinball gradient
            tree = RegressionTree(spec.max_depth, spec.min_samples_leaf).fit(X, grad)
            # re-label each leaf with the quantile of its residuals (line search)
            leaves = tree.apply(X)
            values = {
                int(leaf): empirical_quantile(resid[leaves == leaf], tau)
                for leaf in np.unique(leaves)
            }
            tree.set_leaf_values(values)
            pred = pred + spec.learning_rate * tree.predict(X)
            self.trees.append(tree)
            self.train_loss_path.append(pinball_loss(y, pred, tau))
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        pred = np.full(X.shape[0], self.f0)
        for tree in self.trees:
            pred += self.spec.learning_rate * tree.predict(X)
        return pred


class FittedQR(FittedModel):
    def __init__(self, spec: ModelSpec, feature_names, boosters):
        super().__init__(spec, feature_names)
        self.boosters = boosters
        self.diagnostics = {
            "train_pinball_final": {
                f"{b.tau}": b.train_loss_path[-1] for b in boosters
            }
        }

    def _predict_features(self, X: np.ndarray) -> PredictiveDistribution:
        raw = np.column_stack([b.predict(X) for b in self.boosters])
        q = np.sort(raw, axis=1)  # monotone repair, per row
        lo, med, hi = q[:, 0], q[:, 1], q[:, 2]
        taus = self.spec.params.quantiles
        return PredictiveDistribution(
            mean=med,
            std=(hi - lo) / (2.0 * 1.96),
            lower=lo,
            upper=hi,
            level=taus[2] - taus[0],
        )


def qr_fit(train: Dataset, spec: ModelSpec) -> FittedQR:
    X, y = train.features(), train.target()
    boosters = [_QuantileBooster(tau, spec.params).fit(X, y) for tau in spec.params.quantiles]
    return FittedQR(spec, train.schema.feature_names, boosters)


# --- natural gradient boosting with Normal outputs -------------------------


@dataclass(frozen=True)
class NGBoostSpec:
    """Probabilistic boosting of a Normal(mu, exp(log_sigma)) output."""

    n_stages: int = 300
    learning_rate: float = 0.03
    max_depth: int = 3
    min_samples_leaf: int = 5

    def __post_init__(self):
        if self.n_stages < 0 or not 0 < self.learning_rate <= 1:
            raise InvalidSpecError("need n_stages >= 0 and learning_rate in (0, 1]")


def normal_nll(y, mu, log_sigma) -> float:
    """Mean Normal negative log likelihood."""
    sigma2 = np.exp(2.0 * np.asarray(log_sigma))
    return float(
        np.mean(0.5 * math.log(2.0 * math.pi) + np.asarray(log_sigma) + (y - mu) ** 2 / (2 * sigma2))
    )


def normal_natural_gradient(y, mu, log_sigma) -> tuple[np.ndarray, np.ndarray]:
    """Fisher-preconditioned NLL gradient in the (mu, log_sigma) chart.

    The plain gradient is ((mu - y)/sigma^2, 1 - (y - mu)^2/sigma^2) and the
    Fisher information is diag(1/sigma^2, 2), so preconditioning yields
    (mu - y, (1 - (y - mu)^2/sigma^2) / 2).
    """
    sigma2 = np.exp(2.0 * np.asarray(log_sigma))
    ng_mu = mu - y
    ng_ls = 0.5 * (1.0 - (y - mu) ** 2 / sigma2)
    return ng_mu, ng_ls


def normal_fisher_diag(log_sigma) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal of the Fisher information in the (mu, log_sigma) chart."""
    sigma2 = np.exp(2.0 * np.asarray(log_sigma))
    return 1.0 / sigma2, np.full_like(np.asarray(log_sigma, dtype=float), 2.0)


class FittedNGBoost(FittedModel):
    def __init__(self, spec, feature_names, mu0, ls0, stages, nll_path):
        super().__init__(spec, feature_names)
        self.mu0 = mu0
        self.ls0 = ls0
        self.stages = stages  # list of (tree_mu, tree_ls, step)
        self.nll_path = nll_path
        self.diagnostics = {"train_nll_path_first_last": (nll_path[0], nll_path[-1])}

    def _raw(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mu = np.full(X.shape[0], self.mu0)
        ls = np.full(X.shape[0], self.ls0)
        for tree_mu, tree_ls, step in self.stages:
            mu -= step * tree_mu.predict(X)
            ls -= step * tree_ls.predict(X)
        return mu, ls

    def _predict_features(self, X: np.ndarray) -> PredictiveDistribution:
        mu, ls = self._raw(X)
        return gaussian_interval(mu, np.exp(ls), self.spec.interval_multiplier)


def ngboost_fit(train: Dataset, spec: ModelSpec) -> FittedNGBoost:
    X, y = train.features(), train.target()
    params: NGBoostSpec = spec.params
    mu0 = float(y.mean())
    sigma0 = float(y.std())
    if sigma0 == 0.0:
        raise DegenerateVarianceError(
            "all training targets identical: initial sigma would be 0; "
            "add a little jitter to the targets"
        )
    ls0 = math.log(sigma0)

    mu = np.full(y.shape[0], mu0)
    ls = np.full(y.shape[0], ls0)
    nll_path = [normal_nll(y, mu, ls)]
    stages = []
    for _ in range(params.n_stages):
        ng_mu, ng_ls = normal_natural_gradient(y, mu, ls)
        tree_mu = RegressionTree(params.max_depth, params.min_samples_leaf).fit(X, ng_mu)
        tree_ls = RegressionTree(params.max_depth, params.min_samples_leaf).fit(X, ng_ls)
        dir_mu = tree_mu.predict(X)
        dir_ls = tree_ls.predict(X)
        step = params.learning_rate
        current = nll_path[-1]
        accepted = 0.0
        for _ in range(11):  # halving line search keeps training NLL monotone
            cand = normal_nll(y, mu - step * dir_mu, ls - step * dir_ls)
            if cand <= current:
                accepted = step
                current = cand
                break
            step *= 0.5
        if accepted > 0.0:
            mu = mu - accepted * dir_mu
            ls = ls - accepted * dir_ls
        stages.append((tree_mu, tree_ls, accepted))
        nll_path.append(current)
    return FittedNGBoost(spec, train.schema.feature_names, mu0, ls0, stages, nll_path)
