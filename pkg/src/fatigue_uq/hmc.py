"""Hamiltonian Monte Carlo with dual-averaging step-size adaptation.

The sampler integrates leapfrog trajectories under an identity mass matrix
and adapts the step size during warmup toward a target acceptance
probability, freezing it afterwards. Trajectories either run a fixed number
of leapfrog steps with a Metropolis accept/reject, or, optionally, double
until the path starts doubling back on itself (a U-turn), with a hard cap
on the number of doublings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllRejectedError

DIVERGENCE_THRESHOLD = 1000.0


@dataclass
class HMCResult:
    chain: np.ndarray  # (n_draws, dim)
    accept_rate: float
    step_size: float
    divergences: int
    warmup_accept_rate: float


def leapfrog(logp_and_grad, theta, r, grad, eps: float, n_steps: int):
    """Integrate Hamiltonian dynamics; returns (theta, r, logp, grad).

    Symplectic and time-reversible: integrating n steps, negating the
    momentum, and integrating n more steps returns to the start.
    """
    theta = np.array(theta, dtype=float)
    r = np.array(r, dtype=float)
    grad = np.asarray(grad, dtype=float)
    logp = None
    for _ in range(n_steps):
        r = r + 0.5 * eps * grad
        theta = theta + eps * r
        logp, grad = logp_and_grad(theta)
        r = r + 0.5 * eps * grad
    if logp is None:
        logp, grad = logp_and_grad(theta)
    return theta, r, logp, grad


def find_reasonable_epsilon(logp_and_grad, theta, rng) -> float:
    """Crude bracketing heuristic for the initial step size."""
    eps = 1.0
    logp, grad = logp_and_grad(theta)
    r = rng.standard_normal(theta.shape[0])
    _, r1, logp1, _ = leapfrog(logp_and_grad, theta, r, grad, eps, 1)
    joint0 = logp - 0.5 * r @ r
    joint1 = logp1 - 0.5 * r1 @ r1
    if not np.isfinite(joint1):
        joint1 = -np.inf
    a = 1.0 if joint1 - joint0 > math.log(0.5) else -1.0
    while a * (joint1 - joint0) > -a * math.log(2.0):
        eps *= 2.0**a
        if eps < 1e-10 or eps > 1e10:
            break
        _, r1, logp1, _ = leapfrog(logp_and_grad, theta, r, grad, eps, 1)
        joint1 = logp1 - 0.5 * r1 @ r1
        if not np.isfinite(joint1):
            joint1 = -np.inf
    return eps


class _DualAveraging:
    """Step-size controller targeting a fixed acceptance probability."""

    def __init__(self, eps0: float, target: float, gamma=0.05, t0=10.0, kappa=0.75):
        self.mu = math.log(10.0 * eps0)
        self.target = target
        self.gamma = gamma
        self.t0 = t0
        self.kappa = kappa
        self.log_eps = math.log(eps0)
        self.log_eps_bar = 0.0
        self.h_bar = 0.0
        self.m = 0

    def update(self, accept_stat: float) -> float:
        self.m += 1
        frac = 1.0 / (self.m + self.t0)
        self.h_bar = (1.0 - frac) * self.h_bar + frac * (self.target - accept_stat)
        self.log_eps = self.mu - math.sqrt(self.m) / self.gamma * self.h_bar
        eta = self.m**-self.kappa
        self.log_eps_bar = eta * self.log_eps + (1.0 - eta) * self.log_eps_bar
        return math.exp(self.log_eps)

    @property
    def adapted(self) -> float:
        return math.exp(self.log_eps_bar)


def _fixed_length_transition(logp_and_grad, state, eps, n_steps, rng, stats):
    theta, logp, grad = state
    r0 = rng.standard_normal(theta.shape[0])
    theta1, r1, logp1, grad1 = leapfrog(logp_and_grad, theta, r0, grad, eps, n_steps)
    h0 = -logp + 0.5 * r0 @ r0
    h1 = -logp1 + 0.5 * r1 @ r1
    energy_error = h1 - h0
    if not np.isfinite(energy_error):
        energy_error = np.inf
    if energy_error > DIVERGENCE_THRESHOLD:
        stats["divergences"] += 1
    alpha = math.exp(min(0.0, -energy_error)) if np.isfinite(energy_error) else 0.0
    if rng.random() < alpha:
        stats["accepted"] += 1
        return (theta1, logp1, grad1), alpha
    return (theta, logp, grad), alpha


def _uturn_transition(logp_and_grad, state, eps, max_doublings, rng, stats):
    """One trajectory with doubling until a U-turn (slice-sampler variant)."""
    theta, logp, grad = state
    dim = theta.shape[0]
    r0 = rng.standard_normal(dim)
    joint0 = logp - 0.5 * r0 @ r0
    log_u = joint0 - rng.exponential(1.0)

    def build(theta, r, grad, direction, depth):
        # returns (minus, plus, proposal, n_in_slice, keep_going, alpha_sum, n_alpha)
        if depth == 0:
            t1, r1, lp1, g1 = leapfrog(logp_and_grad, theta, r, grad, direction * eps, 1)
            joint = lp1 - 0.5 * r1 @ r1
            if not np.isfinite(joint):
                joint = -np.inf
            n_ok = 1 if log_u <= joint else 0
            keep = log_u < joint + DIVERGENCE_THRESHOLD
            if not keep:
                stats["divergences"] += 1
            alpha = math.exp(min(0.0, joint - joint0))
            prop = (t1, lp1, g1)
            return (t1, r1, g1), (t1, r1, g1), prop, n_ok, keep, alpha, 1
        minus, plus, prop, n_ok, keep, alpha, n_alpha = build(theta, r, grad, direction, depth - 1)
        if keep:
            if direction == -1:
                minus, _, prop2, n2, keep2, a2, na2 = build(*minus, direction, depth - 1)
            else:
                _, plus, prop2, n2, keep2, a2, na2 = build(*plus, direction, depth - 1)
            if n2 > 0 and rng.random() < n2 / max(n_ok + n2, 1):
                prop = prop2
            n_ok += n2
            alpha += a2
            n_alpha += na2
            keep = keep2 and _no_uturn(minus, plus)
        return minus, plus, prop, n_ok, keep, alpha, n_alpha

    def _no_uturn(minus, plus):
        dt = plus[0] - minus[0]
        return (dt @ minus[1]) >= 0 and (dt @ plus[1]) >= 0

    minus = (theta, r0, grad)
    plus = (theta, r0, grad)
    sample = (theta, logp, grad)
    n_kept = 1
    alpha_sum, n_alpha = 0.0, 0
    moved = False
    for depth in range(max_doublings):
        direction = -1 if rng.random() < 0.5 else 1
        if direction == -1:
            minus, _, prop, n2, keep, a2, na2 = build(*minus, direction, depth)
        else:
            _, plus, prop, n2, keep, a2, na2 = build(*plus, direction, depth)
        alpha_sum += a2
        n_alpha += na2
        if keep and n2 > 0 and rng.random() < min(1.0, n2 / n_kept):
            sample = prop
            moved = True
        n_kept += n2
        if not keep or not _no_uturn(minus, plus):
            break
    if moved:
        stats["accepted"] += 1
    accept_stat = alpha_sum / max(n_alpha, 1)
    return sample, accept_stat


def hmc_sample(
    logp_and_grad,
    init: np.ndarray,
    n_warmup: int = 500,
    n_draws: int = 100,
    seed: int = 0,
    target_accept: float = 0.8,
    num_leapfrog: int = 32,
    uturn: bool = False,
    max_doublings: int = 8,
    step_size: float | None = None,
) -> HMCResult:
    """Draw from a log density given its value-and-gradient callable.

    Step size adapts by dual averaging during the ``n_warmup`` discarded
    iterations and is frozen afterwards. Returns the post-warmup chain plus
    acceptance and divergence diagnostics. Fully deterministic per seed.
    """
    rng = np.random.default_rng(seed)
    theta = np.array(init, dtype=float)
    logp, grad = logp_and_grad(theta)
    if not np.isfinite(logp):
        raise ValueError("log density must be finite at the initial point")

    eps = step_size if step_size is not None else find_reasonable_epsilon(logp_and_grad, theta, rng)
    da = _DualAveraging(eps, target_accept)
    stats = {"divergences": 0, "accepted": 0}
    state = (theta, logp, grad)

    warmup_alphas = []
    for _ in range(n_warmup):
        if uturn:
            state, alpha = _uturn_transition(logp_and_grad, state, eps, max_doublings, rng, stats)
        else:
            state, alpha = _fixed_length_transition(
                logp_and_grad, state, eps, num_leapfrog, rng, stats
            )
        warmup_alphas.append(alpha)
        eps = da.update(alpha)
    if n_warmup > 0:
        eps = da.adapted

    stats["accepted"] = 0
    alphas = []
    chain = np.empty((n_draws, theta.shape[0]))
    for i in range(n_draws):
        if uturn:
            state, alpha = _uturn_transition(logp_and_grad, state, eps, max_doublings, rng, stats)
        else:
            state, alpha = _fixed_length_transition(
                logp_and_grad, state, eps, num_leapfrog, rng, stats
            )
        alphas.append(alpha)
        chain[i] = state[0]
    if n_draws > 0 and stats["accepted"] == 0:
        raise AllRejectedError(
            f"no proposals accepted in {n_draws} post-warmup draws (step size {eps:.3g})"
        )
    return HMCResult(
        chain=chain,
        accept_rate=float(np.mean(alphas)) if alphas else 0.0,
        step_size=eps,
        divergences=stats["divergences"],
        warmup_accept_rate=float(np.mean(warmup_alphas)) if warmup_alphas else 0.0,
    )
