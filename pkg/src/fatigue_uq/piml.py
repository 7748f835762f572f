"""Physics-informed mechanisms: feature augmentation and bounded-life loss.

Two independent components. The augmentation step fits an S-N power law to
the training split and appends the implied log10 fatigue life at each row's
stress level as a new input feature, optionally per composition group. The
loss adds hinge penalties that push gradient-trained models to predict lives
between one cycle and the ten-million-cycle endurance bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import InvalidSpecError, SchemaMismatchError, ZeroExponentError
from .physics import BasquinFit, basquin_fit

WHOLE_DATASET = "__whole_dataset__"


@dataclass(frozen=True)
class AugmentationSpec:
    """Controls the S-N feature augmentation.

    ``group_by`` selects the fitting granularity: None fits one power law to
    the whole training split; a tuple of column names fits one per distinct
    combination of those columns, falling back to the whole-split fit for
    groups smaller than ``min_group_size`` or with degenerate stress spread.
    """

    group_by: tuple[str, ...] | None = None
    feature_name: str = "basquin_log10_life"
    min_group_size: int = 8

    def __post_init__(self):
        if self.min_group_size < 2:
            raise InvalidSpecError(f"min_group_size must be >= 2, got {self.min_group_size}")
        if self.group_by is not None:
            object.__setattr__(self, "group_by", tuple(self.group_by))


def _fit_log10_life(fit: BasquinFit, stress: np.ndarray) -> np.ndarray:
    # log10 N = (log10 stress - log10 c) / m, stable for extreme lives
    return (np.log10(stress) - math.log10(fit.c)) / fit.m


def augment_basquin_feature(
    train: Dataset,
    others: list[Dataset],
    spec: AugmentationSpec,
) -> tuple[Dataset, list[Dataset], dict]:
    """Append the power-law life estimate as an input feature.

    All fits use the training dataset only, so held-out rows receive features
    that depend on their own stress values and nothing else from their split.
    Returns the augmented training set, the augmented other sets in order,
    and the fitted coefficients keyed by group (``"__whole_dataset__"`` for
    the fallback fit).
    """
    for i, other in enumerate(others):
        if other.schema.feature_names != train.schema.feature_names:
            raise SchemaMismatchError(f"dataset {i} feature columns differ from training split")
    if spec.feature_name in train.schema.column_names:
        raise InvalidSpecError(f"column {spec.feature_name!r} already present")
    if spec.group_by:
        missing = [c for c in spec.group_by if c not in train.schema.column_names]
        if missing:
            raise SchemaMismatchError(f"grouping columns {missing} not in schema")

    stress = train.stress()
    if np.any(stress <= 0):
        raise InvalidSpecError("stress column must be strictly positive for S-N fitting")
    whole = basquin_fit(np.column_stack([stress, train.target()]))
    if whole.m == 0:
        raise ZeroExponentError("whole-split S-N fit has zero exponent, cannot invert")
    fits: dict = {WHOLE_DATASET: whole}

    if spec.group_by:
        group_cols = np.column_stack([train.column(c) for c in spec.group_by])
        for key in {tuple(row) for row in group_cols}:
            mask = np.all(group_cols == np.asarray(key), axis=1)
            if int(mask.sum()) < spec.min_group_size:
                continue
            try:
                fit = basquin_fit(np.column_stack([stress[mask], train.target()[mask]]))
            except Exception:
                continue  # sparse or constant-stress group: whole-split fallback
            if fit.m != 0:
                fits[key] = fit

    def feature_for(ds: Dataset) -> np.ndarray:
        s = ds.stress()
        if np.any(s <= 0):
            raise InvalidSpecError("stress column must be strictly positive for S-N features")
        if not spec.group_by:
            return _fit_log10_life(whole, s)
        out = np.empty(ds.n_rows)
        cols = np.column_stack([ds.column(c) for c in spec.group_by])
        for i in range(ds.n_rows):
            fit = fits.get(tuple(cols[i]), whole)
            out[i] = _fit_log10_life(fit, s[i : i + 1])[0]
        return out

    aug_train = train.with_column(spec.feature_name, feature_for(train))
    aug_others = [ds.with_column(spec.feature_name, feature_for(ds)) for ds in others]
    return aug_train, aug_others, fits


@dataclass(frozen=True)
class PhysicsLossSpec:
    """Bounded-life loss configuration, in log10 life units.

    The defaults bound predictions between 1 cycle (0.0) and ten million
    cycles (7.0). ``printed_form`` flips the hinge arguments to the
    literal published signs, which penalize in-bounds predictions; it exists
    only for compatibility experiments.
    """

    lambda1: float = 1.0
    lambda2: float = 1.0
    lower_bound: float = 0.0
    upper_bound: float = 7.0
    printed_form: bool = False

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise InvalidSpecError("penalty weights must be non-negative")
        if not self.lower_bound < self.upper_bound:
            raise InvalidSpecError("lower_bound must be below upper_bound")


def physics_loss(y_true, y_pred, spec: PhysicsLossSpec) -> tuple[float, np.ndarray]:
    """Mean squared error plus hinge penalties on out-of-bounds predictions.

    Per sample: ``(y_true - y_pred)**2 + lambda1*relu(lower - y_pred)
    + lambda2*relu(y_pred - upper)``, averaged over the batch. Returns the
    batch loss and its exact subgradient with respect to each prediction
    (the hinge subgradient at a kink is 0).
    """
    yt = np.atleast_1d(np.asarray(y_true, dtype=float))
    yp = np.atleast_1d(np.asarray(y_pred, dtype=float))
    if yt.shape != yp.shape:
        raise ValueError(f"shape mismatch: {yt.shape} vs {yp.shape}")
    n = yt.size
    err = yt - yp
    if spec.printed_form:
        low_arg = yp - spec.lower_bound
        high_arg = spec.upper_bound - yp
        d_low = np.where(low_arg > 0, 1.0, 0.0)
        d_high = np.where(high_arg > 0, -1.0, 0.0)
    else:
        low_arg = spec.lower_bound - yp
        high_arg = yp - spec.upper_bound
        d_low = np.where(low_arg > 0, -1.0, 0.0)
        d_high = np.where(high_arg > 0, 1.0, 0.0)
    per_sample = err**2 + spec.lambda1 * np.maximum(low_arg, 0.0) + spec.lambda2 * np.maximum(
        high_arg, 0.0
    )
    grad = (-2.0 * err + spec.lambda1 * d_low + spec.lambda2 * d_high) / n
    return float(per_sample.mean()), grad
