"""Metrics and the seeded cross-validation harness.

Point metrics (R2, Pearson correlation, RMSE, MAE) and interval metrics
(coverage, mean interval width, and their composite) are all computed in
log10-life space. The harness splits once per (n, k, seed), runs the same
folds through every model, optionally applies the physics feature
augmentation using each fold's training split only, and aggregates per-fold
metrics into mean and standard deviation rows.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .contract import ModelSpec, PredictiveDistribution, fit, provides_intervals
from .data import Dataset, kfold_split, scaler_apply, scaler_fit, target_log_transform
from .errors import LengthMismatchError, ZeroWidthError
from .piml import AugmentationSpec, augment_basquin_feature

METRIC_NAMES = ("r2", "pcc", "rmse", "mae", "coverage", "miw", "composite")


def point_metrics(y_true, y_pred) -> tuple[float, float, float, float]:
    """Return (r2, pcc, rmse, mae).

    The Pearson correlation is undefined when either vector is constant; it
    is reported as NaN (missing) rather than zero in that case.
    """
    yt = np.asarray(y_true, dtype=float)
    yp = np.asarray(y_pred, dtype=float)
    if yt.shape != yp.shape or yt.ndim != 1 or yt.size == 0:
        raise LengthMismatchError(f"need equal non-empty vectors, got {yt.shape} and {yp.shape}")
    resid = yt - yp
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((yt - yt.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else -math.inf)
    st, sp = yt.std(), yp.std()
    if st == 0 or sp == 0:
        pcc = math.nan
    else:
        pcc = float(np.mean((yt - yt.mean()) * (yp - yp.mean())) / (st * sp))
    rmse = float(np.sqrt(np.mean(resid**2)))
    mae = float(np.mean(np.abs(resid)))
    return r2, pcc, rmse, mae


def uq_metrics(y_true, dist: PredictiveDistribution) -> tuple[float, float]:
    """Coverage fraction (bounds inclusive) and mean interval width."""
    yt = np.asarray(y_true, dtype=float)
    if yt.shape[0] != len(dist):
        raise LengthMismatchError(f"{yt.shape[0]} truths vs {len(dist)} predictions")
    if yt.size == 0:
        raise LengthMismatchError("need at least one row")
    inside = (dist.lower <= yt) & (yt <= dist.upper)
    return float(inside.mean()), float(np.mean(dist.upper - dist.lower))


def composite_metric(coverage: float, miw: float) -> float:
    """0.75 * coverage + 0.25 / miw, with coverage as a fraction."""
    if miw == 0:
        raise ZeroWidthError("composite metric undefined for zero mean interval width")
    return 0.75 * coverage + 0.25 / miw


@dataclass(frozen=True)
class MetricSet:
    r2: float
    pcc: float
    rmse: float
    mae: float
    coverage: float = math.nan
    miw: float = math.nan
    composite: float = math.nan

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def evaluate_predictions(y_true, dist: PredictiveDistribution, point_only: bool) -> MetricSet:
    r2, pcc, rmse, mae = point_metrics(y_true, dist.mean)
    if point_only:
        return MetricSet(r2, pcc, rmse, mae)
    coverage, miw = uq_metrics(y_true, dist)
    composite = composite_metric(coverage, miw) if miw > 0 else math.nan
    return MetricSet(r2, pcc, rmse, mae, coverage, miw, composite)


@dataclass
class EvaluationReport:
    """Per-fold metrics, aggregates, and reproducibility metadata."""

    model_names: tuple[str, ...]
    k: int
    per_fold: dict[str, list[MetricSet]]
    metadata: dict = field(default_factory=dict)
    diagnostics: dict[str, list[dict]] = field(default_factory=dict)
    fold_predictions: dict[str, tuple[np.ndarray, PredictiveDistribution]] = field(
        default_factory=dict
    )

    def aggregates(self) -> dict[str, dict[str, tuple[float, float]]]:
        """Mean and sample standard deviation of each metric across folds."""
        out: dict[str, dict[str, tuple[float, float]]] = {}
        for name in self.model_names:
            folds = self.per_fold[name]
            agg = {}
            for metric in METRIC_NAMES:
                vals = np.array([getattr(ms, metric) for ms in folds])
                if np.any(np.isnan(vals)):
                    agg[metric] = (math.nan, math.nan)
                else:
                    std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
                    agg[metric] = (float(vals.mean()), std)
            out[name] = agg
        return out


def _unique_names(models: list[ModelSpec]) -> list[str]:
    names = []
    for spec in models:
        base = spec.name or spec.family
        name = base
        suffix = 2
        while name in names:
            name = f"{base}_{suffix}"
            suffix += 1
        names.append(name)
    return names


def cross_validate(
    models: list[ModelSpec],
    data: Dataset,
    k: int,
    seed: int,
    augmentation: AugmentationSpec | None = None,
    keep_fold_predictions: int | None = None,
    extra_metadata: dict | None = None,
) -> EvaluationReport:
    """Evaluate every model on identical seeded folds of one dataset.

    ``data`` is raw-cycle-space input: each fold is augmented (training split
    only), min-max scaled on the training split, and log-transformed before
    fitting, so no information flows from any test fold into training.
    ``keep_fold_predictions`` retains one fold's (y_true, distribution) pair
    per model for plotting.
    """
    names = _unique_names(models)
    plan = kfold_split(data.n_rows, k, seed)
    per_fold: dict[str, list[MetricSet]] = {n: [] for n in names}
    diagnostics: dict[str, list[dict]] = {n: [] for n in names}
    augmentation_fits: list[dict] = []
    fold_predictions = {}

    for fold in range(k):
        train_idx, test_idx = plan.train_test(fold)
        train = data.take(train_idx)
        test = data.take(test_idx)
        if augmentation is not None:
            train, (test,), aug_fits = augment_basquin_feature(train, [test], augmentation)
            whole = aug_fits["__whole_dataset__"]
            augmentation_fits.append(
                {"fold": fold, "c": whole.c, "m": whole.m, "r2_loglog": whole.r2_loglog,
                 "n_group_fits": len(aug_fits) - 1}
            )
        scaler = scaler_fit(train)
        train = scaler_apply(scaler, train)
        test = scaler_apply(scaler, test)
        train = target_log_transform(train)
        test = target_log_transform(test)
        y_true = test.target()
        for name, spec in zip(names, models):
            model = fit(spec, train)
            dist = model.predict(test)
            per_fold[name].append(
                evaluate_predictions(y_true, dist, point_only=not provides_intervals(spec))
            )
            diagnostics[name].append(dict(model.diagnostics))
            if keep_fold_predictions == fold:
                fold_predictions[name] = (y_true, dist)

    config_digest = hashlib.sha256(
        repr((models, k, seed, augmentation)).encode()
    ).hexdigest()
    metadata = {
        "k": k,
        "seed": seed,
        "n_rows": data.n_rows,
        "dataset_hash": data.content_hash(),
        "spec_hash": config_digest,
        "augmentation": repr(augmentation) if augmentation is not None else None,
        "augmentation_fits": augmentation_fits,
    }
    if extra_metadata:
        metadata.update(extra_metadata)
    return EvaluationReport(
        model_names=tuple(names),
        k=k,
        per_fold=per_fold,
        metadata=metadata,
        diagnostics=diagnostics,
        fold_predictions=fold_predictions,
    )
