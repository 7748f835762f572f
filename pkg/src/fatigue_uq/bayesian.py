"""Probabilistic-parameter networks: mean-field VI and HMC posterior sampling.

Both families place an isotropic Normal prior over every network parameter
and use a Gaussian likelihood with fixed noise on the log10-life targets.
The variational family is an independent Normal per parameter with a
softplus-parameterized scale, trained by maximizing the reparameterized
evidence lower bound. The MCMC family samples the exact (unnormalized)
posterior with the Hamiltonian sampler. When the physics loss is selected,
its hinge penalties are added to the negative log likelihood, which keeps
the target a proper unnormalized density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contract import FittedModel, ModelSpec, PredictiveDistribution, gaussian_interval
from .data import Dataset
from .errors import EmptyChainError, InvalidSpecError, NonFiniteLossError, NoSamplesError
from .hmc import hmc_sample
from .mlp import MLP, MLPArchitecture, SGDNesterov, make_optimizer
from .piml import PhysicsLossSpec

LOG_2PI = math.log(2.0 * math.pi)


def _penalty_and_dout(f: np.ndarray, physics: PhysicsLossSpec) -> tuple[float, np.ndarray]:
    """Sum of hinge penalties over predictions and its gradient."""
    low = np.maximum(physics.lower_bound - f, 0.0)
    high = np.maximum(f - physics.upper_bound, 0.0)
    pen = physics.lambda1 * low.sum() + physics.lambda2 * high.sum()
    dpen = -physics.lambda1 * (low > 0) + physics.lambda2 * (high > 0)
    return float(pen), dpen


def log_likelihood_and_dout(
    net: MLP, X: np.ndarray, y: np.ndarray, sigma_lik: float,
    physics: PhysicsLossSpec | None = None,
):
    """Gaussian log likelihood, its gradient w.r.t. predictions, and the cache."""
    f, cache = net.forward(X, mode="eval")
    n = y.shape[0]
    resid = y - f
    loglik = -0.5 * n * LOG_2PI - n * math.log(sigma_lik) - float(resid @ resid) / (
        2.0 * sigma_lik**2
    )
    dout = resid / sigma_lik**2  # d loglik / d f
    if physics is not None:
        pen, dpen = _penalty_and_dout(f, physics)
        loglik -= pen
        dout = dout - dpen
    return loglik, dout, cache


def log_posterior(
    theta: np.ndarray,
    net: MLP,
    X: np.ndarray,
    y: np.ndarray,
    prior_std: float,
    sigma_lik: float,
    physics: PhysicsLossSpec | None = None,
) -> tuple[float, np.ndarray]:
    """Full log density (likelihood + prior, constants included) and gradient."""
    net.set_flat(np.asarray(theta, dtype=float))
    loglik, dout, cache = log_likelihood_and_dout(net, X, y, sigma_lik, physics)
    dim = theta.shape[0]
    logprior = -0.5 * dim * LOG_2PI - dim * math.log(prior_std) - float(theta @ theta) / (
        2.0 * prior_std**2
    )
    grad = MLP.flatten_grads(net.backward(cache, dout)) - np.asarray(theta) / prior_std**2
    return loglik + logprior, grad


def kl_diag_gaussians(mu: np.ndarray, sigma: np.ndarray, prior_std: float) -> float:
    """KL(q || prior) between independent Normals and an isotropic Normal prior."""
    return float(
        np.sum(
            np.log(prior_std / sigma)
            + (sigma**2 + mu**2) / (2.0 * prior_std**2)
            - 0.5
        )
    )


def softplus(rho):
    return np.logaddexp(0.0, rho)


def softplus_inv(sigma):
    # inverse of log(1 + exp(rho)); stable for small sigma
    sigma = np.asarray(sigma, dtype=float)
    return sigma + np.log(-np.expm1(-sigma))


@dataclass(frozen=True)
class VISpec:
    """Mean-field variational BNN."""

    hidden: tuple[int, ...] = (100, 100)
    prior_std: float = 0.06
    sigma_init: float = 0.01
    learning_rate: float = 0.001
    momentum: float = 0.9
    epochs: int = 5000
    elbo_mc_samples: int = 1
    predict_samples: int = 1000
    sigma_lik: float = 0.1
    include_likelihood_noise: bool = False

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(self.hidden))
        if self.prior_std <= 0 or self.sigma_lik <= 0 or self.sigma_init <= 0:
            raise InvalidSpecError("prior_std, sigma_lik and sigma_init must be positive")
        if self.predict_samples < 1 or self.elbo_mc_samples < 1:
            raise InvalidSpecError("sample counts must be >= 1")


def elbo_and_grads(
    mu: np.ndarray,
    rho: np.ndarray,
    eps_draws: np.ndarray,
    net: MLP,
    X: np.ndarray,
    y: np.ndarray,
    spec: VISpec,
    physics: PhysicsLossSpec | None = None,
):
    """Reparameterized ELBO estimate and exact gradients w.r.t. (mu, rho).

    ``eps_draws`` has shape (n_samples, dim); passing the same draws twice
    reproduces the same value and gradients, which makes finite-difference
    validation possible.
    """
    sigma = softplus(rho)
    dsig_drho = 1.0 / (1.0 + np.exp(-rho))  # sigmoid
    loglik_sum = 0.0
    dmu = np.zeros_like(mu)
    drho = np.zeros_like(rho)
    for eps in eps_draws:
        w = mu + sigma * eps
        net.set_flat(w)
        loglik, dout, cache = log_likelihood_and_dout(net, X, y, spec.sigma_lik, physics)
        gw = MLP.flatten_grads(net.backward(cache, dout))
        loglik_sum += loglik
        dmu += gw
        drho += gw * eps * dsig_drho
    k = eps_draws.shape[0]
    loglik_mean = loglik_sum / k
    dmu /= k
    drho /= k
    kl = kl_diag_gaussians(mu, sigma, spec.prior_std)
    dkl_dmu = mu / spec.prior_std**2
    dkl_dsigma = -1.0 / sigma + sigma / spec.prior_std**2
    elbo = loglik_mean - kl
    return elbo, dmu - dkl_dmu, drho - dkl_dsigma * dsig_drho


class FittedVI(FittedModel):
    def __init__(self, spec, feature_names, net, mu, rho, elbo_path):
        super().__init__(spec, feature_names)
        self.net = net
        self.mu = mu
        self.rho = rho
        self.elbo_path = elbo_path
        self.diagnostics = {
            "elbo_first_last": (elbo_path[0], elbo_path[-1]) if elbo_path else None
        }

    def _predict_features(self, X: np.ndarray) -> PredictiveDistribution:
        return vi_predict(self, X)


def vi_fit(train: Dataset, spec: ModelSpec) -> FittedVI:
    params: VISpec = spec.params
    X, y = train.features(), train.target()
    arch = MLPArchitecture(X.shape[1], params.hidden, dropout_rate=0.0)
    net = MLP.initialize(arch, spec.seed)
    mu = net.get_flat()
    rho = np.full(mu.shape[0], float(softplus_inv(params.sigma_init)))
    rng = np.random.default_rng(spec.seed + 1)
    physics = spec.loss if isinstance(spec.loss, PhysicsLossSpec) else None
    opt = make_optimizer(
        SGDNesterov(params.learning_rate, params.momentum), 2 * mu.shape[0]
    )
    theta = np.concatenate([mu, rho])
    elbo_path = []
    dim = mu.shape[0]
    for epoch in range(params.epochs):
        eps = rng.standard_normal((params.elbo_mc_samples, dim))
        elbo, dmu, drho = elbo_and_grads(
            theta[:dim], theta[dim:], eps, net, X, y, params, physics
        )
        if not np.isfinite(elbo):
            raise NonFiniteLossError(f"ELBO diverged at epoch {epoch}")
        elbo_path.append(elbo)
        grad = -np.concatenate([dmu, drho])  # minimize the negative ELBO
        theta = opt.step(theta, grad)
        if not np.all(np.isfinite(theta)):
            raise NonFiniteLossError(f"variational parameters diverged at epoch {epoch}")
    return FittedVI(spec, train.schema.feature_names, net, theta[:dim], theta[dim:], elbo_path)


def vi_predict(model: FittedVI, X: np.ndarray) -> PredictiveDistribution:
    """Sample weight vectors from q and aggregate forward passes per row."""
    params: VISpec = model.spec.params
    if params.predict_samples < 1:
        raise NoSamplesError("predict_samples must be >= 1")
    rng = np.random.default_rng(model.spec.seed + 2)
    sigma = softplus(model.rho)
    samples = np.empty((params.predict_samples, X.shape[0]))
    for s in range(params.predict_samples):
        w = model.mu + sigma * rng.standard_normal(model.mu.shape[0])
        model.net.set_flat(w)
        samples[s] = model.net.predict(X)
    std = samples.std(axis=0)
    if params.include_likelihood_noise:
        std = np.sqrt(std**2 + params.sigma_lik**2)
    return gaussian_interval(
        samples.mean(axis=0), std, model.spec.interval_multiplier, samples_available=True
    )


@dataclass(frozen=True)
class MCMCSpec:
    """BNN posterior sampled with the Hamiltonian sampler."""

    hidden: tuple[int, ...] = (10, 10, 10, 10, 10)
    prior_std: float = 1.0
    sigma_lik: float = 0.1
    warmup: int = 500
    draws: int = 100
    target_accept: float = 0.8
    num_leapfrog: int = 32
    uturn: bool = False
    max_doublings: int = 8

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(self.hidden))
        if self.prior_std <= 0 or self.sigma_lik <= 0:
            raise InvalidSpecError("prior_std and sigma_lik must be positive")
        if self.draws < 1:
            raise InvalidSpecError("draws must be >= 1")


class FittedMCMC(FittedModel):
    def __init__(self, spec, feature_names, net, chain, diagnostics):
        super().__init__(spec, feature_names)
        self.net = net
        self.chain = chain
        self.diagnostics = diagnostics

    def _predict_features(self, X: np.ndarray) -> PredictiveDistribution:
        return mcmc_predict(
            self.chain,
            self.net,
            X,
            self.spec.params.sigma_lik,
            self.spec.interval_multiplier,
        )


def mcmc_fit(train: Dataset, spec: ModelSpec) -> FittedMCMC:
    params: MCMCSpec = spec.params
    X, y = train.features(), train.target()
    arch = MLPArchitecture(X.shape[1], params.hidden, dropout_rate=0.0)
    net = MLP.initialize(arch, spec.seed)
    physics = spec.loss if isinstance(spec.loss, PhysicsLossSpec) else None

    def logp_and_grad(theta):
        return log_posterior(theta, net, X, y, params.prior_std, params.sigma_lik, physics)

    result = hmc_sample(
        logp_and_grad,
        net.get_flat(),
        n_warmup=params.warmup,
        n_draws=params.draws,
        seed=spec.seed,
        target_accept=params.target_accept,
        num_leapfrog=params.num_leapfrog,
        uturn=params.uturn,
        max_doublings=params.max_doublings,
    )
    diagnostics = {
        "accept_rate": result.accept_rate,
        "warmup_accept_rate": result.warmup_accept_rate,
        "step_size": result.step_size,
        "divergences": result.divergences,
        "sampler": "uturn" if params.uturn else f"fixed_length_{params.num_leapfrog}",
    }
    return FittedMCMC(spec, train.schema.feature_names, net, result.chain, diagnostics)


def mcmc_predict(
    chain: np.ndarray, net: MLP, X: np.ndarray, sigma_lik: float, z: float
) -> PredictiveDistribution:
    """Posterior predictive: spread of per-draw means plus observation noise."""
    chain = np.atleast_2d(np.asarray(chain, dtype=float))
    if chain.shape[0] == 0:
        raise EmptyChainError("posterior chain is empty")
    preds = np.empty((chain.shape[0], X.shape[0]))
    for i, theta in enumerate(chain):
        net.set_flat(theta)
        preds[i] = net.predict(X)
    std = np.sqrt(preds.var(axis=0) + sigma_lik**2)
    return gaussian_interval(preds.mean(axis=0), std, z, samples_available=True)
