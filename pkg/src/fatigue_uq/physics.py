"""Closed-form fatigue life relations.

Covers the stress-life power law (Basquin) with fitting and inversion, the
Walker equivalent stress for mean-stress correction, and forward evaluators
for the strain-life and critical-plane damage models together with a generic
bisection life solver.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateFitError,
    InvalidRatioError,
    MissingParameterError,
    NonMonotoneError,
    NonPositiveInputError,
    NonPositiveLifeError,
    NonPositiveStressError,
    NoRootError,
    ZeroExponentError,
)


class NonPhysicalExponentWarning(UserWarning):
    """Fitted S-N exponent is non-negative: the curve does not decrease."""


@dataclass(frozen=True)
class BasquinFit:
    """Power-law S-N fit ``stress = c * N**m``.

    Attributes
    ----------
    c : float
        Stress coefficient in MPa, always positive.
    m : float
        Exponent; physical S-N curves have m < 0.
    n_points : int
        Number of observations used in the fit.
    r2_loglog : float
        Coefficient of determination of the straight-line fit in
        (log N, log stress) space. Equals 1.0 for exact power-law data.
    """

    c: float
    m: float
    n_points: int
    r2_loglog: float

    def __post_init__(self):
        if not self.c > 0:
            raise NonPositiveInputError(f"stress coefficient must be positive, got {self.c}")


def basquin_fit(points: Sequence[tuple[float, float]]) -> BasquinFit:
    """Fit the S-N power law by ordinary least squares in log-log space.

    Parameters
    ----------
    points : sequence of (stress, cycles)
        Stress in MPa and cycles to failure, all strictly positive.
        At least two distinct stress values and two distinct cycle
        counts are required.

    Returns
    -------
    BasquinFit

    Raises
    ------
    NonPositiveInputError
        If any stress or cycle count is not strictly positive.
    DegenerateFitError
        If fewer than two distinct stresses or cycle counts are present.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise DegenerateFitError(f"need >= 2 (stress, cycles) points, got shape {pts.shape}")
    stress, cycles = pts[:, 0], pts[:, 1]
    if not np.all(np.isfinite(pts)) or np.any(pts <= 0):
        raise NonPositiveInputError("all stresses and cycle counts must be finite and > 0")
    if np.unique(stress).size < 2:
        raise DegenerateFitError("need at least 2 distinct stress values")
    if np.unique(cycles).size < 2:
        raise DegenerateFitError("need at least 2 distinct cycle counts")

    # OLS of log(stress) on log(cycles); the log base cancels in the slope.
    x = np.log(cycles)
    y = np.log(stress)
    xbar, ybar = x.mean(), y.mean()
    sxx = np.sum((x - xbar) ** 2)
    m = float(np.sum((x - xbar) * (y - ybar)) / sxx)
    intercept = ybar - m * xbar
    resid = y - (intercept + m * x)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - ybar) ** 2))
    r2 = 1.0 - ss_res / ss_tot

    if m >= 0:
        warnings.warn(
            f"fitted exponent m={m:.4g} is non-negative; S-N curves decrease",
            NonPhysicalExponentWarning,
            stacklevel=2,
        )
    return BasquinFit(c=float(math.exp(intercept)), m=m, n_points=pts.shape[0], r2_loglog=r2)


def basquin_stress(fit: BasquinFit, cycles: float) -> float:
    """Forward evaluation ``stress = c * cycles**m``."""
    if cycles <= 0:
        raise NonPositiveLifeError(f"cycles must be > 0, got {cycles}")
    return fit.c * cycles**fit.m


def basquin_life(fit: BasquinFit, stress: float) -> float:
    """Invert the fitted power law: cycles to failure at a stress level.

    Returns ``(stress / c) ** (1 / m)``, the exact inverse of the forward
    relation.
    """
    if fit.m == 0:
        raise ZeroExponentError("cannot invert a flat S-N curve (m = 0)")
    if not stress > 0:
        raise NonPositiveStressError(f"stress must be > 0, got {stress}")
    # Work in log space to avoid overflow for extreme stress/coefficient ratios.
    return math.exp((math.log(stress) - math.log(fit.c)) / fit.m)


@dataclass(frozen=True)
class WalkerParams:
    """Inputs to the Walker equivalent-stress relation.

    At least one of ``sigma_max`` and ``sigma_a`` must be given. When both
    are present they must be consistent with the stress ratio:
    sigma_a = sigma_max * (1 - R) / 2.
    """

    gamma: float
    r_ratio: float
    sigma_max: float | None = None
    sigma_a: float | None = None

    def __post_init__(self):
        if self.r_ratio >= 1:
            raise InvalidRatioError(f"stress ratio R must be < 1, got {self.r_ratio}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.sigma_max is None and self.sigma_a is None:
            raise MissingParameterError("need sigma_max or sigma_a")
        if self.sigma_max is not None and self.sigma_a is not None:
            implied = self.sigma_max * (1.0 - self.r_ratio) / 2.0
            scale = max(abs(self.sigma_a), abs(implied), 1e-300)
            if abs(self.sigma_a - implied) > 1e-9 * scale:
                raise ValueError(
                    f"sigma_a={self.sigma_a} inconsistent with "
                    f"sigma_max*(1-R)/2={implied} at R={self.r_ratio}"
                )


def walker_equivalent_stress(p: WalkerParams) -> float:
    """Walker equivalent stress.

    Uses sigma_max * ((1-R)/2)**gamma when the maximum stress is known,
    and the algebraically identical sigma_a * (2/(1-R))**(1-gamma) form
    otherwise.
    """
    half_range = (1.0 - p.r_ratio) / 2.0
    if p.sigma_max is not None:
        return p.sigma_max * half_range**p.gamma
    return p.sigma_a * (1.0 / half_range) ** (1.0 - p.gamma)


# --- strain-life and critical-plane damage models --------------------------


@dataclass(frozen=True)
class Stromeyer:
    """Stress-life law with an endurance limit: stress = sigma_f + c * N**m."""

    sigma_f: float
    c: float
    m: float


@dataclass(frozen=True)
class CoffinManson:
    """Elastic + plastic strain-life law."""

    sigma_sc: float
    e_mod: float
    eps_f: float
    b: float
    c_exp: float

    def __post_init__(self):
        if self.e_mod <= 0:
            raise ValueError(f"modulus of elasticity must be > 0, got {self.e_mod}")


@dataclass(frozen=True)
class SWT:
    """Smith-Watson-Topper damage product (strain amplitude times stress amplitude)."""

    sigma_sc: float
    e_mod: float
    eps_f: float
    b: float
    c_exp: float
    sigma_a: float

    def __post_init__(self):
        if self.e_mod <= 0:
            raise ValueError(f"modulus of elasticity must be > 0, got {self.e_mod}")


@dataclass(frozen=True)
class SWTCriticalPlane:
    """Tensile-cracking critical-plane damage model."""

    sigma_f_prime: float
    e_mod: float
    sigma_sc: float
    eps_f: float
    b: float
    c_exp: float

    def __post_init__(self):
        if self.e_mod <= 0:
            raise ValueError(f"modulus of elasticity must be > 0, got {self.e_mod}")


@dataclass(frozen=True)
class FatemiSocie:
    """Shear-cracking critical-plane damage model."""

    tau_f_prime: float
    g_mod: float
    gamma_f_prime: float
    b0: float
    c0: float

    def __post_init__(self):
        if self.g_mod <= 0:
            raise ValueError(f"shear modulus must be > 0, got {self.g_mod}")


@dataclass(frozen=True)
class Xue:
    """Equivalent-strain-amplitude critical-plane damage model."""

    tau_f_prime: float
    g_mod: float
    gamma_f_prime: float
    b0: float
    c0: float

    def __post_init__(self):
        if self.g_mod <= 0:
            raise ValueError(f"shear modulus must be > 0, got {self.g_mod}")


LifeModelSpec = Stromeyer | CoffinManson | SWT | SWTCriticalPlane | FatemiSocie | Xue


def _exponents(model: LifeModelSpec) -> tuple[float, ...]:
    """Exponents whose negativity makes the forward evaluation strictly decreasing."""
    if isinstance(model, Stromeyer):
        return (model.m,)
    if isinstance(model, (CoffinManson, SWT, SWTCriticalPlane)):
        return (model.b, model.c_exp)
    return (model.b0, model.c0)


def life_model_eval(
    model: LifeModelSpec, n_f: float, observables: Mapping[str, float] | None = None
) -> float:
    """Evaluate a life model's damage value at a given number of cycles.

    The returned quantity is the model-specific right-hand side: a stress for
    Stromeyer, a strain range for Coffin-Manson, a strain-stress product for
    the SWT variants, and shear/energy damage parameters for the
    Fatemi-Socie and Xue models. Left-hand-side observables (measured strains
    and stresses on the critical plane) are never needed here; see
    :func:`damage_from_observables` for turning measurements into a target
    damage value.
    """
    if not n_f > 0:
        raise NonPositiveLifeError(f"cycles must be > 0, got {n_f}")
    two_n = 2.0 * n_f
    if isinstance(model, Stromeyer):
        return model.sigma_f + model.c * n_f**model.m
    if isinstance(model, CoffinManson):
        return (model.sigma_sc / model.e_mod) * two_n**model.b + model.eps_f * two_n**model.c_exp
    if isinstance(model, SWT):
        strain = (model.sigma_sc / model.e_mod) * two_n**model.b + model.eps_f * two_n**model.c_exp
        return strain * model.sigma_a
    if isinstance(model, SWTCriticalPlane):
        return (model.sigma_f_prime**2 / model.e_mod) * two_n**model.b + (
            model.sigma_sc * model.eps_f
        ) * two_n ** (model.b + model.c_exp)
    if isinstance(model, FatemiSocie):
        return (model.tau_f_prime / model.g_mod) * two_n**model.b0 + (
            model.gamma_f_prime
        ) * two_n**model.c0
    if isinstance(model, Xue):
        return (model.tau_f_prime / model.g_mod) * two_n ** (2.0 * model.b0) + (
            model.gamma_f_prime
        ) * two_n ** (model.b0 + model.c0)
    raise TypeError(f"unknown life model {type(model).__name__}")


_LHS_KEYS = {
    Stromeyer: ("stress",),
    CoffinManson: ("delta_epsilon",),
    SWT: ("epsilon_swt", "sigma_max"),
    SWTCriticalPlane: ("sigma_max", "delta_epsilon"),
    FatemiSocie: ("delta_gamma_max", "k", "sigma_n_max", "sigma_y"),
    Xue: ("tau_max", "sigma_n_max", "sigma_f_prime", "epsilon_n_star", "delta_gamma_max"),
}


def damage_from_observables(model: LifeModelSpec, observables: Mapping[str, float]) -> float:
    """Compute the measured (left-hand-side) damage value for a life model.

    The result is directly comparable with :func:`life_model_eval` and can be
    passed to :func:`solve_life` as the target. Required keys per model:

    - Stromeyer: ``stress``
    - CoffinManson: ``delta_epsilon``
    - SWT: ``epsilon_swt``, ``sigma_max``
    - SWTCriticalPlane: ``sigma_max``, ``delta_epsilon``
    - FatemiSocie: ``delta_gamma_max``, ``k``, ``sigma_n_max``, ``sigma_y``
    - Xue: ``tau_max``, ``sigma_n_max``, ``sigma_f_prime``, ``epsilon_n_star``,
      ``delta_gamma_max``
    """
    keys = _LHS_KEYS[type(model)]
    missing = [k for k in keys if k not in observables]
    if missing:
        raise MissingParameterError(
            f"{type(model).__name__} damage needs observables {missing}"
        )
    o = observables
    if isinstance(model, Stromeyer):
        return float(o["stress"])
    if isinstance(model, CoffinManson):
        return float(o["delta_epsilon"])
    if isinstance(model, SWT):
        return float(o["epsilon_swt"]) * float(o["sigma_max"])
    if isinstance(model, SWTCriticalPlane):
        return float(o["sigma_max"]) * float(o["delta_epsilon"]) / 2.0
    if isinstance(model, FatemiSocie):
        return (float(o["delta_gamma_max"]) / 2.0) * (
            1.0 + float(o["k"]) * float(o["sigma_n_max"]) / float(o["sigma_y"])
        )
    shear_amp = float(o["delta_gamma_max"]) / 2.0
    return (
        float(o["tau_max"]) / model.tau_f_prime
        + float(o["sigma_n_max"]) / (math.sqrt(3.0) * float(o["sigma_f_prime"]))
    ) * math.sqrt(3.0 * float(o["epsilon_n_star"]) ** 2 + shear_amp**2)


def solve_life(
    model: LifeModelSpec,
    target: float,
    bracket: tuple[float, float],
    rel_tol: float = 1e-10,
    max_iter: int = 200,
) -> float:
    """Invert a life model by bisection on a decreasing bracket.

    Requires the strictly decreasing regime (all model exponents negative)
    and a target between the damage values at the bracket endpoints. Stops
    once the relative residual drops below ``rel_tol`` or after ``max_iter``
    bisections.
    """
    n_lo, n_hi = bracket
    if not (0 < n_lo < n_hi):
        raise ValueError(f"bracket must satisfy 0 < n_lo < n_hi, got {bracket}")
    if any(e >= 0 for e in _exponents(model)):
        raise NonMonotoneError(
            "solve_life requires all exponents negative (strictly decreasing damage)"
        )
    f_lo = life_model_eval(model, n_lo)
    f_hi = life_model_eval(model, n_hi)
    if not f_lo > f_hi:
        raise NonMonotoneError(
            f"damage not decreasing across bracket: f({n_lo})={f_lo}, f({n_hi})={f_hi}"
        )
    if not (f_hi <= target <= f_lo):
        raise NoRootError(f"target {target} outside [{f_hi}, {f_lo}]")

    scale = max(abs(target), 1e-300)
    lo, hi = n_lo, n_hi
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = life_model_eval(model, mid)
        if abs(f_mid - target) <= rel_tol * scale:
            return mid
        if f_mid > target:
            lo = mid  # damage decreases with life: root is to the right
        else:
            hi = mid
    return mid
