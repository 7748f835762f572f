"""Rendering of evaluation reports and interval plots.

The text table mirrors the usual benchmark layout: one row per model with
"mean +/- std" cells over cross-validation folds, coverage shown in percent,
and dashes where a model provides no uncertainty. Machine-readable output is
a flat CSV with separate mean/std columns. Plots are written as SVG with
stable ids and no timestamps so repeated runs emit identical bytes.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .contract import PredictiveDistribution
from .errors import EmptyReportError
from .evaluation import METRIC_NAMES, EvaluationReport

TABLE_COLUMNS = ("Model", "R2", "PCC", "RMSE", "MAE", "Coverage(%)", "MIW", "Composite")


def _cell(mean: float, std: float, percent: bool = False) -> str:
    if math.isnan(mean):
        return "-"
    if percent:
        return f"{100 * mean:.2f} ± {100 * std:.2f}"
    return f"{mean:.4f} ± {std:.4f}"


def render_report(report: EvaluationReport) -> str:
    """Human-readable fixed-width table with one row per model."""
    if not report.model_names:
        raise EmptyReportError("report has no models")
    agg = report.aggregates()
    rows = [list(TABLE_COLUMNS)]
    for name in report.model_names:
        a = agg[name]
        rows.append(
            [
                name,
                _cell(*a["r2"]),
                _cell(*a["pcc"]),
                _cell(*a["rmse"]),
                _cell(*a["mae"]),
                _cell(*a["coverage"], percent=True),
                _cell(*a["miw"]),
                _cell(*a["composite"]),
            ]
        )
    widths = [max(len(r[i]) for r in rows) for i in range(len(TABLE_COLUMNS))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    meta = report.metadata
    lines.append("")
    lines.append(
        f"folds={report.k}  seed={meta.get('seed')}  n_rows={meta.get('n_rows')}"
    )
    lines.append(f"dataset_hash={meta.get('dataset_hash')}")
    lines.append(f"config_hash={meta.get('config_hash', meta.get('spec_hash'))}")
    return "\n".join(lines) + "\n"


def report_to_csv(report: EvaluationReport) -> str:
    """Flat delimiter-separated aggregate table (means and stds)."""
    if not report.model_names:
        raise EmptyReportError("report has no models")
    agg = report.aggregates()
    header = ["model"]
    for metric in METRIC_NAMES:
        header += [f"{metric}_mean", f"{metric}_std"]
    lines = [",".join(header)]
    for name in report.model_names:
        cells = [name]
        for metric in METRIC_NAMES:
            mean, std = agg[name][metric]
            cells += ["" if math.isnan(mean) else repr(mean), "" if math.isnan(std) else repr(std)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def per_fold_csv(report: EvaluationReport) -> str:
    """Per-(model, fold) metric rows, for recomputing the aggregates."""
    header = ["model", "fold"] + list(METRIC_NAMES)
    lines = [",".join(header)]
    for name in report.model_names:
        for fold, ms in enumerate(report.per_fold[name]):
            cells = [name, str(fold)]
            for metric in METRIC_NAMES:
                v = getattr(ms, metric)
                cells.append("" if math.isnan(v) else repr(v))
            lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def emit_plot(y_true, dist: PredictiveDistribution, path: str | Path, title: str = "") -> None:
    """Write an SVG of truths, predictions, and the interval band.

    Samples are sorted by predicted value; the shaded band spans the
    predicted interval, mirroring the common S-N benchmark presentation.
    """
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    y_true = np.asarray(y_true, dtype=float)
    if y_true.size == 0 or len(dist) != y_true.size:
        raise EmptyReportError("need matching non-empty truths and predictions to plot")
    order = np.argsort(dist.mean, kind="stable")
    x = np.arange(y_true.size)

    with matplotlib.rc_context({"svg.hashsalt": "fatigue-uq"}):
        fig, ax = plt.subplots(figsize=(7.0, 4.0))
        ax.fill_between(
            x,
            dist.lower[order],
            dist.upper[order],
            color="green",
            alpha=0.25,
            linewidth=0,
            label=f"{dist.level:.0%} interval",
        )
        ax.plot(x, dist.mean[order], color="tab:blue", lw=1.2, label="predicted")
        ax.scatter(x, y_true[order], s=12, color="tab:red", zorder=3, label="experimental")
        ax.set_xlabel("sample (sorted by predicted life)")
        ax.set_ylabel("log10 fatigue life")
        if title:
            ax.set_title(title)
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def write_report_files(report: EvaluationReport, outdir: str | Path) -> list[Path]:
    """Write table text, aggregate CSV, and per-fold CSV; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for fname, content in (
        ("report.txt", render_report(report)),
        ("report.csv", report_to_csv(report)),
        ("report_folds.csv", per_fold_csv(report)),
    ):
        p = outdir / fname
        p.write_text(content, encoding="utf-8")
        paths.append(p)
    return paths
