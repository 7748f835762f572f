"""Fatigue life prediction for metal alloys with calibrated uncertainty.

The package pairs closed-form stress-life physics (power-law S-N fitting,
Walker equivalent stress, strain-life and critical-plane models) with eight
regression families that report predictive intervals, a physics-informed
feature-augmentation step and bounded-life loss, and a seeded
cross-validation harness with coverage/width/composite metrics.
"""

from .bayesian import MCMCSpec, VISpec
from .boosting import NGBoostSpec, QRSpec
from .contract import (
    FittedModel,
    ModelSpec,
    PredictiveDistribution,
    fit,
    predict,
    provides_intervals,
)
from .data import (
    Dataset,
    DatasetSchema,
    FoldPlan,
    Scaler,
    SynthSpec,
    builtin_schema,
    kfold_split,
    load_csv,
    load_schema,
    save_schema,
    scaler_apply,
    scaler_fit,
    synth_generate,
    target_log_inverse,
    target_log_transform,
    write_csv,
)
from .evaluation import (
    EvaluationReport,
    MetricSet,
    composite_metric,
    cross_validate,
    point_metrics,
    uq_metrics,
)
from .gpr import GPRGrid, GPRSpec
from .hmc import HMCResult, hmc_sample, leapfrog
from .mlp import MLP, Adam, MLPArchitecture, SGDNesterov
from .neural import DeepEnsembleSpec, MCDropoutSpec, NNSpec
from .physics import (
    BasquinFit,
    CoffinManson,
    FatemiSocie,
    Stromeyer,
    SWT,
    SWTCriticalPlane,
    WalkerParams,
    Xue,
    basquin_fit,
    basquin_life,
    basquin_stress,
    damage_from_observables,
    life_model_eval,
    solve_life,
    walker_equivalent_stress,
)
from .piml import (
    AugmentationSpec,
    PhysicsLossSpec,
    augment_basquin_feature,
    physics_loss,
)
from .report import emit_plot, render_report, report_to_csv, write_report_files

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "AugmentationSpec",
    "BasquinFit",
    "CoffinManson",
    "Dataset",
    "DatasetSchema",
    "DeepEnsembleSpec",
    "EvaluationReport",
    "FatemiSocie",
    "FittedModel",
    "FoldPlan",
    "GPRGrid",
    "GPRSpec",
    "HMCResult",
    "MCDropoutSpec",
    "MCMCSpec",
    "MLP",
    "MLPArchitecture",
    "MetricSet",
    "ModelSpec",
    "NGBoostSpec",
    "NNSpec",
    "PhysicsLossSpec",
    "PredictiveDistribution",
    "QRSpec",
    "SGDNesterov",
    "SWT",
    "SWTCriticalPlane",
    "Scaler",
    "Stromeyer",
    "SynthSpec",
    "VISpec",
    "WalkerParams",
    "Xue",
    "augment_basquin_feature",
    "basquin_fit",
    "basquin_life",
    "basquin_stress",
    "builtin_schema",
    "composite_metric",
    "cross_validate",
    "damage_from_observables",
    "emit_plot",
    "fit",
    "hmc_sample",
    "kfold_split",
    "leapfrog",
    "life_model_eval",
    "load_csv",
    "load_schema",
    "physics_loss",
    "point_metrics",
    "predict",
    "provides_intervals",
    "render_report",
    "report_to_csv",
    "save_schema",
    "scaler_apply",
    "scaler_fit",
    "solve_life",
    "synth_generate",
    "target_log_inverse",
    "target_log_transform",
    "uq_metrics",
    "walker_equivalent_stress",
    "write_csv",
    "write_report_files",
]
