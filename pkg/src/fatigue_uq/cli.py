"""Command-line entry point for reproducible runs.

Commands: ``synth`` (write a synthetic S-N dataset), ``cv`` (cross-validate
the models in a config file), ``fit`` (train on the full dataset and dump
diagnostics), ``predict`` (train, then predict a holdout file), ``report``
(re-render a per-fold CSV as a table), and ``plot`` (interval plot from a
predictions file). Exit codes: 0 success, 2 configuration error, 3 data
error, 4 model error.

The run configuration is a single JSON object; every model family's
hyperparameters are plain keys, so a config file fully describes a run.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bayesian, boosting, gpr, neural
from .contract import ModelSpec, fit as fit_model
from .data import (
    Dataset,
    DatasetSchema,
    SynthSpec,
    builtin_schema,
    load_csv,
    load_schema,
    save_schema,
    scaler_apply,
    scaler_fit,
    synth_generate,
    target_log_transform,
    write_csv,
)
from .errors import (
    FatigueUQError,
    HeaderMismatchError,
    InvalidKError,
    InvalidSpecError,
    NonPositiveTargetError,
    RowParseError,
    SchemaMismatchError,
)
from .evaluation import METRIC_NAMES, EvaluationReport, MetricSet, cross_validate
from .mlp import Adam, SGDNesterov
from .piml import AugmentationSpec, PhysicsLossSpec, augment_basquin_feature
from .report import emit_plot, render_report, write_report_files

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_MODEL = 4

_DATA_ERRORS = (
    FileNotFoundError,
    HeaderMismatchError,
    RowParseError,
    SchemaMismatchError,
    NonPositiveTargetError,
)

FAMILIES = {
    "qr": boosting.QRSpec,
    "ngboost": boosting.NGBoostSpec,
    "gpr": gpr.GPRSpec,
    "nn": neural.NNSpec,
    "deep_ensemble": neural.DeepEnsembleSpec,
    "mc_dropout": neural.MCDropoutSpec,
    "bnn_vi": bayesian.VISpec,
    "bnn_mcmc": bayesian.MCMCSpec,
}
_FAMILY_NAMES = {cls: name for name, cls in FAMILIES.items()}


def _optimizer_from_dict(d: dict):
    kind = d.get("kind", "adam")
    args = {k: v for k, v in d.items() if k != "kind"}
    if kind == "adam":
        return Adam(**args)
    if kind == "sgd_nesterov":
        return SGDNesterov(**args)
    raise InvalidSpecError(f"unknown optimizer kind {kind!r}")


def _optimizer_to_dict(opt) -> dict:
    if isinstance(opt, Adam):
        return {"kind": "adam", "learning_rate": opt.learning_rate, "beta1": opt.beta1,
                "beta2": opt.beta2, "epsilon": opt.epsilon}
    return {"kind": "sgd_nesterov", "learning_rate": opt.learning_rate, "momentum": opt.momentum}


def _loss_from_config(value):
    if value in (None, "mse"):
        return "mse"
    if isinstance(value, dict):
        kind = value.get("kind", "physics")
        if kind != "physics":
            raise InvalidSpecError(f"unknown loss kind {kind!r}")
        args = {k: v for k, v in value.items() if k != "kind"}
        return PhysicsLossSpec(**args)
    raise InvalidSpecError(f"unknown loss {value!r}")


def _loss_to_config(loss):
    if loss == "mse":
        return "mse"
    return {
        "kind": "physics",
        "lambda1": loss.lambda1,
        "lambda2": loss.lambda2,
        "lower_bound": loss.lower_bound,
        "upper_bound": loss.upper_bound,
        "printed_form": loss.printed_form,
    }


def model_spec_from_dict(d: dict) -> ModelSpec:
    """Build a ModelSpec from its config-file representation."""
    family = d.get("family")
    if family not in FAMILIES:
        raise InvalidSpecError(f"unknown model family {family!r}; choose from {sorted(FAMILIES)}")
    params = dict(d.get("params", {}))
    for key in ("hidden", "quantiles"):
        if key in params:
            params[key] = tuple(params[key])
    if "optimizer" in params:
        params["optimizer"] = _optimizer_from_dict(params["optimizer"])
    if family == "gpr" and params.get("grid") is not None:
        params["grid"] = gpr.GPRGrid(
            length_scales=tuple(params["grid"]["length_scales"]),
            signal_variances=tuple(params["grid"]["signal_variances"]),
            noise_variances=tuple(params["grid"]["noise_variances"]),
        )
    try:
        family_params = FAMILIES[family](**params)
    except TypeError as exc:
        raise InvalidSpecError(f"bad parameters for family {family!r}: {exc}") from None
    return ModelSpec(
        params=family_params,
        seed=int(d.get("seed", 0)),
        loss=_loss_from_config(d.get("loss")),
        interval_multiplier=float(d.get("interval_multiplier", 1.96)),
        name=d.get("name"),
    )


def model_spec_to_dict(spec: ModelSpec) -> dict:
    family = _FAMILY_NAMES[type(spec.params)]
    params = {}
    for key, value in vars(spec.params).items():
        if key == "optimizer":
            params[key] = _optimizer_to_dict(value)
        elif key == "grid" and value is not None:
            params[key] = {
                "length_scales": list(value.length_scales),
                "signal_variances": list(value.signal_variances),
                "noise_variances": list(value.noise_variances),
            }
        elif isinstance(value, tuple):
            params[key] = list(value)
        else:
            params[key] = value
    return {
        "family": family,
        "params": params,
        "seed": spec.seed,
        "loss": _loss_to_config(spec.loss),
        "interval_multiplier": spec.interval_multiplier,
        "name": spec.name,
    }


@dataclass
class RunConfig:
    dataset_path: Path
    schema: DatasetSchema
    models: list[ModelSpec]
    k: int
    seed: int
    augmentation: AugmentationSpec | None
    output_dir: Path
    emit_plots: bool
    config_hash: str


def _schema_from_config(value, config_dir: Path) -> DatasetSchema:
    if isinstance(value, dict):
        return DatasetSchema.from_dict(value)
    if isinstance(value, str):
        if value in ("titanium", "carbon_steel", "synthetic"):
            if value == "synthetic":
                raise InvalidSpecError("synthetic schemas are written next to the CSV; pass the path")
            return builtin_schema(value)
        path = Path(value)
        if not path.is_absolute():
            path = config_dir / path
        return load_schema(path)
    raise InvalidSpecError("dataset.schema must be a name, a path, or an inline object")


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    raw = path.read_bytes()
    cfg = json.loads(raw)
    dataset = cfg.get("dataset")
    if not isinstance(dataset, dict) or "path" not in dataset or "schema" not in dataset:
        raise InvalidSpecError("config needs dataset.path and dataset.schema")
    models = [model_spec_from_dict(m) for m in cfg.get("models", [])]
    if not models:
        raise InvalidSpecError("config needs at least one model")
    cv = cfg.get("cv", {})
    k = int(cv.get("k", 5))
    if k < 2:
        raise InvalidKError("cv.k must be >= 2")
    piml_cfg = cfg.get("piml", {})
    augmentation = None
    aug_cfg = piml_cfg.get("augment")
    if aug_cfg and aug_cfg.get("enabled", True):
        augmentation = AugmentationSpec(
            group_by=tuple(aug_cfg["group_by"]) if aug_cfg.get("group_by") else None,
            feature_name=aug_cfg.get("feature_name", "basquin_log10_life"),
            min_group_size=int(aug_cfg.get("min_group_size", 8)),
        )
    config_dir = path.resolve().parent
    dataset_path = Path(dataset["path"])
    if not dataset_path.is_absolute():
        dataset_path = config_dir / dataset_path
    output_dir = Path(cfg.get("output_dir", "fatigue_uq_out"))
    if not output_dir.is_absolute():
        output_dir = config_dir / output_dir
    return RunConfig(
        dataset_path=dataset_path,
        schema=_schema_from_config(dataset["schema"], config_dir),
        models=models,
        k=k,
        seed=int(cv.get("seed", 0)),
        augmentation=augmentation,
        output_dir=output_dir,
        emit_plots=bool(cfg.get("emit_plots", False)),
        config_hash=hashlib.sha256(raw).hexdigest(),
    )


def _preprocess_full(config: RunConfig, data: Dataset):
    """Augment + scale + log-transform the full dataset, as one training split."""
    if config.augmentation is not None:
        data, _, _ = augment_basquin_feature(data, [], config.augmentation)
    scaler = scaler_fit(data)
    data = scaler_apply(scaler, data)
    data = target_log_transform(data)
    return data, scaler


# --- commands ---------------------------------------------------------------


def cmd_synth(args) -> int:
    spec = SynthSpec(
        c=args.c,
        m=args.m,
        noise_sigma=args.noise,
        n=args.n,
        stress_range=(args.stress_lo, args.stress_hi),
        n_nuisance=args.nuisance,
        seed=args.seed,
    )
    data = synth_generate(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(data, out)
    save_schema(data.schema, out.with_suffix(".schema.json"))
    print(f"wrote {data.n_rows} rows to {out} (+ {out.with_suffix('.schema.json').name})")
    return EXIT_OK


def cmd_cv(args) -> int:
    config = load_run_config(args.config)
    data = load_csv(config.dataset_path, config.schema)
    report = cross_validate(
        config.models,
        data,
        k=config.k,
        seed=config.seed,
        augmentation=config.augmentation,
        keep_fold_predictions=0 if config.emit_plots else None,
        extra_metadata={"config_hash": config.config_hash, "dataset_path": str(config.dataset_path)},
    )
    outdir = config.output_dir
    paths = write_report_files(report, outdir)
    diag_path = outdir / "diagnostics.json"
    diag_path.write_text(
        json.dumps(
            {"metadata": report.metadata, "per_model": report.diagnostics},
            indent=2,
            sort_keys=True,
            default=repr,
        )
        + "\n",
        encoding="utf-8",
    )
    paths.append(diag_path)
    if config.emit_plots:
        for name, (y_true, dist) in report.fold_predictions.items():
            plot_path = outdir / f"plot_{name}.svg"
            emit_plot(y_true, dist, plot_path, title=name)
            paths.append(plot_path)
    print(render_report(report), end="")
    print(f"wrote: {', '.join(str(p) for p in paths)}")
    return EXIT_OK


def _fit_all(config: RunConfig):
    data = load_csv(config.dataset_path, config.schema)
    train, scaler = _preprocess_full(config, data)
    fitted = []
    names = []
    for spec in config.models:
        base = spec.name or spec.family
        name = base
        suffix = 2
        while name in names:
            name = f"{base}_{suffix}"
            suffix += 1
        names.append(name)
        fitted.append(fit_model(spec, train))
    return data, train, scaler, names, fitted


def cmd_fit(args) -> int:
    config = load_run_config(args.config)
    _, train, _, names, fitted = _fit_all(config)
    outdir = config.output_dir
    outdir.mkdir(parents=True, exist_ok=True)
    diag = {
        name: model.diagnostics for name, model in zip(names, fitted)
    }
    payload = {
        "config_hash": config.config_hash,
        "dataset_hash": train.content_hash(),
        "n_rows": train.n_rows,
        "models": diag,
    }
    path = outdir / "fit_diagnostics.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=repr) + "\n", encoding="utf-8")
    print(f"fitted {len(fitted)} models on {train.n_rows} rows; wrote {path}")
    return EXIT_OK


def cmd_predict(args) -> int:
    config = load_run_config(args.config)
    data, _, scaler, names, fitted = _fit_all(config)
    holdout = load_csv(args.holdout, config.schema)
    if config.augmentation is not None:
        _, (holdout,), _ = augment_basquin_feature(data, [holdout], config.augmentation)
    holdout = scaler_apply(scaler, holdout)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for name, model in zip(names, fitted):
        dist = model.predict(holdout)
        target = out if len(fitted) == 1 else out.with_name(f"{out.stem}_{name}{out.suffix}")
        with open(target, "w", encoding="utf-8") as fh:
            fh.write("mean,std,lower,upper\n")
            for i in range(len(dist)):
                fh.write(
                    f"{dist.mean[i]!r},{dist.std[i]!r},{dist.lower[i]!r},{dist.upper[i]!r}\n"
                )
        written.append(target)
    print(f"wrote predictions for {len(dist)} rows: {', '.join(str(p) for p in written)}")
    return EXIT_OK


def cmd_report(args) -> int:
    rows = Path(args.folds).read_text(encoding="utf-8").strip().splitlines()
    header = rows[0].split(",")
    if header[:2] != ["model", "fold"] or tuple(header[2:]) != METRIC_NAMES:
        raise InvalidSpecError(f"{args.folds} is not a per-fold report CSV")
    per_fold: dict[str, list[MetricSet]] = {}
    for line in rows[1:]:
        cells = line.split(",")
        name = cells[0]
        vals = [float(c) if c else math.nan for c in cells[2:]]
        per_fold.setdefault(name, []).append(MetricSet(*vals))
    if not per_fold:
        raise InvalidSpecError(f"{args.folds} contains no fold rows")
    k = max(len(v) for v in per_fold.values())
    report = EvaluationReport(model_names=tuple(per_fold), k=k, per_fold=per_fold)
    text = render_report(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_plot(args) -> int:
    config = load_run_config(args.config)
    truth = load_csv(args.truth, config.schema)
    y_true = np.log10(truth.target())
    lines = Path(args.predictions).read_text(encoding="utf-8").strip().splitlines()
    if lines[0] != "mean,std,lower,upper":
        raise InvalidSpecError(f"{args.predictions} is not a predictions CSV")
    vals = np.array([[float(c) for c in line.split(",")] for line in lines[1:]])
    if vals.shape[0] != truth.n_rows:
        raise SchemaMismatchError(
            f"{vals.shape[0]} predictions vs {truth.n_rows} truth rows"
        )
    from .contract import PredictiveDistribution

    dist = PredictiveDistribution(vals[:, 0], vals[:, 1], vals[:, 2], vals[:, 3])
    emit_plot(y_true, dist, args.out, title=Path(args.predictions).stem)
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fatigue-uq",
        description="Fatigue life prediction with calibrated uncertainty intervals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic S-N dataset (CSV + schema)")
    p.add_argument("--n", type=int, required=True, help="number of rows")
    p.add_argument("--c", type=float, required=True, help="power-law stress coefficient (MPa)")
    p.add_argument("--m", type=float, required=True, help="power-law exponent (< 0)")
    p.add_argument("--noise", type=float, default=0.0, help="log10-life noise std")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stress-lo", type=float, default=400.0)
    p.add_argument("--stress-hi", type=float, default=1200.0)
    p.add_argument("--nuisance", type=int, default=0, help="irrelevant uniform feature columns")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("cv", help="seeded k-fold cross-validation of configured models")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("fit", help="fit configured models on the full dataset")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="fit, then predict a holdout CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--holdout", required=True, help="holdout CSV (target column optional)")
    p.add_argument("--out", required=True, help="predictions CSV path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("report", help="render a per-fold CSV as a table")
    p.add_argument("--folds", required=True, help="report_folds.csv from a cv run")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("plot", help="interval plot from a predictions CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--truth", required=True, help="CSV with the experimental target")
    p.add_argument("--out", required=True, help="output SVG path")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (InvalidSpecError, InvalidKError, json.JSONDecodeError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FatigueUQError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
