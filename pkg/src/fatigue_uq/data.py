"""Dataset schemas, CSV ingestion, preprocessing, fold splitting, synthesis.

Datasets are immutable numeric tables with a declared schema: every column
has a role (composition, condition, measurement, or target), one column is
the applied stress and one is the fatigue life target. Built-in schemas for
the two supported alloy families ship with the package as JSON files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    EmptySplitError,
    HeaderMismatchError,
    InvalidKError,
    InvalidSpecError,
    NonPositiveTargetError,
    RowParseError,
    SchemaMismatchError,
)

ROLES = ("composition", "condition", "measurement", "target")


@dataclass(frozen=True)
class DatasetSchema:
    """Ordered column declaration for a fatigue dataset.

    ``columns`` is a tuple of (name, role) pairs. Exactly one column has the
    target role in a trainable schema; prediction-only views produced by
    :meth:`without_target` carry none.
    """

    columns: tuple[tuple[str, str], ...]
    stress_column: str
    target_column: str | None

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple((str(n), str(r)) for n, r in self.columns))
        names = [n for n, _ in self.columns]
        if len(set(names)) != len(names):
            raise InvalidSpecError("column names must be unique")
        for n, r in self.columns:
            if r not in ROLES:
                raise InvalidSpecError(f"unknown role {r!r} for column {n!r}")
        targets = [n for n, r in self.columns if r == "target"]
        if self.target_column is None:
            if targets:
                raise InvalidSpecError("target_column is None but a target-role column exists")
        else:
            if targets != [self.target_column]:
                raise InvalidSpecError(
                    f"expected exactly one target column {self.target_column!r}, found {targets}"
                )
        roles = dict(self.columns)
        if self.stress_column not in roles:
            raise InvalidSpecError(f"stress column {self.stress_column!r} not in schema")
        if roles[self.stress_column] != "condition":
            raise InvalidSpecError(f"stress column {self.stress_column!r} must have role condition")

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.columns)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(n for n, r in self.columns if r != "target")

    def index_of(self, name: str) -> int:
        return self.column_names.index(name)

    def without_target(self) -> "DatasetSchema":
        """Schema for prediction-only data that lacks the target column."""
        cols = tuple((n, r) for n, r in self.columns if r != "target")
        return DatasetSchema(columns=cols, stress_column=self.stress_column, target_column=None)

    def with_feature(self, name: str, role: str = "condition") -> "DatasetSchema":
        if name in self.column_names:
            raise InvalidSpecError(f"column {name!r} already in schema")
        return replace(self, columns=self.columns + ((name, role),))

    def to_dict(self) -> dict:
        return {
            "columns": [{"name": n, "role": r} for n, r in self.columns],
            "stress_column": self.stress_column,
            "target_column": self.target_column,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSchema":
        cols = tuple((c["name"], c["role"]) for c in d["columns"])
        return cls(
            columns=cols,
            stress_column=d["stress_column"],
            target_column=d.get("target_column"),
        )


def load_schema(path: str | Path) -> DatasetSchema:
    with open(path, encoding="utf-8") as fh:
        return DatasetSchema.from_dict(json.load(fh))


def save_schema(schema: DatasetSchema, path: str | Path) -> None:
    Path(path).write_text(json.dumps(schema.to_dict(), indent=2) + "\n", encoding="utf-8")


def builtin_schema(name: str) -> DatasetSchema:
    """Load one of the shipped schemas: ``titanium`` or ``carbon_steel``."""
    ref = resources.files("fatigue_uq.schemas").joinpath(f"{name}.json")
    try:
        text = ref.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InvalidSpecError(f"no built-in schema named {name!r}") from None
    return DatasetSchema.from_dict(json.loads(text))


@dataclass(frozen=True)
class Dataset:
    """Immutable numeric table plus its schema.

    ``target_space`` records whether the target column holds raw cycle counts
    (``"cycles"``) or log10-transformed values (``"log10"``). Validation of the
    cycles >= 1 invariant happens at the ingestion boundaries (CSV loading and
    synthesis), not here, so that sliced and transformed views stay cheap.
    """

    schema: DatasetSchema
    values: np.ndarray
    provenance: str = "unspecified"
    target_space: str = "cycles"

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != len(self.schema.columns):
            raise SchemaMismatchError(
                f"values shape {arr.shape} does not match {len(self.schema.columns)} columns"
            )
        if arr.size and not np.all(np.isfinite(arr)):
            raise InvalidSpecError("dataset contains non-finite values")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.schema.index_of(name)]

    def features(self) -> np.ndarray:
        idx = [self.schema.index_of(n) for n in self.schema.feature_names]
        return self.values[:, idx]

    def target(self) -> np.ndarray:
        if self.schema.target_column is None:
            raise SchemaMismatchError("dataset has no target column")
        return self.column(self.schema.target_column)

    def stress(self) -> np.ndarray:
        return self.column(self.schema.stress_column)

    def take(self, indices) -> "Dataset":
        return replace(self, values=self.values[np.asarray(indices, dtype=int)])

    def with_column(self, name: str, values: np.ndarray, role: str = "condition") -> "Dataset":
        col = np.asarray(values, dtype=float).reshape(-1, 1)
        if col.shape[0] != self.n_rows:
            raise SchemaMismatchError(f"new column has {col.shape[0]} rows, expected {self.n_rows}")
        return replace(
            self,
            schema=self.schema.with_feature(name, role),
            values=np.hstack([self.values, col]),
        )

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps(self.schema.to_dict(), sort_keys=True).encode())
        h.update(self.target_space.encode())
        h.update(np.ascontiguousarray(self.values).tobytes())
        return h.hexdigest()


def _validate_ingested(schema: DatasetSchema, rows: np.ndarray) -> None:
    if schema.target_column is not None and rows.size:
        tgt = rows[:, schema.index_of(schema.target_column)]
        bad = np.nonzero(tgt < 1.0)[0]
        if bad.size:
            raise RowParseError(
                f"target {schema.target_column!r} must be >= 1 cycle; "
                f"offending row indices: {bad[:20].tolist()}"
            )


def load_csv(path: str | Path, schema: DatasetSchema) -> Dataset:
    """Load and validate a comma-separated file against a schema.

    The header must contain exactly the schema's column names in any order.
    If the file lacks only the target column, a prediction-only dataset is
    returned. Any unparseable, missing, or invalid cell fails the load with
    row-indexed diagnostics.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise HeaderMismatchError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        want = set(schema.column_names)
        got = set(header)
        if len(got) != len(header):
            raise HeaderMismatchError(f"{path}: duplicate header columns")
        if got != want:
            if schema.target_column is not None and got == want - {schema.target_column}:
                schema = schema.without_target()
            else:
                missing = sorted(want - got)
                extra = sorted(got - want)
                raise HeaderMismatchError(
                    f"{path}: header mismatch (missing {missing}, unexpected {extra})"
                )
        order = [header.index(n) for n in schema.column_names]

        data = []
        problems = []
        for i, row in enumerate(reader):
            if len(row) != len(header):
                problems.append(f"row {i}: expected {len(header)} cells, got {len(row)}")
                continue
            parsed = []
            for name, j in zip(schema.column_names, order):
                cell = row[j].strip()
                try:
                    v = float(cell)
                except ValueError:
                    problems.append(f"row {i}, column {name!r}: unparseable {cell!r}")
                    v = 0.0
                else:
                    if not math.isfinite(v):
                        problems.append(f"row {i}, column {name!r}: non-finite value {cell!r}")
                        v = 0.0
                parsed.append(v)
            data.append(parsed)
        if problems:
            shown = "; ".join(problems[:20])
            raise RowParseError(f"{path}: {len(problems)} bad cells ({shown})")

    arr = np.asarray(data, dtype=float).reshape(len(data), len(schema.columns))
    _validate_ingested(schema, arr)
    return Dataset(schema=schema, values=arr, provenance=str(path))


def write_csv(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset as UTF-8 comma-separated values with a header row.

    Floats use ``repr`` so a write/load round trip reproduces values exactly.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.schema.column_names)
        for row in dataset.values:
            writer.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class Scaler:
    """Per-feature min-max ranges learned from a training split."""

    feature_names: tuple[str, ...]
    mins: np.ndarray
    maxs: np.ndarray
    constant_columns: tuple[str, ...] = ()


def scaler_fit(train: Dataset) -> Scaler:
    """Record the training min and max of every non-target column."""
    if train.n_rows == 0:
        raise EmptySplitError("cannot fit a scaler on an empty split")
    feats = train.features()
    mins = feats.min(axis=0)
    maxs = feats.max(axis=0)
    constant = tuple(
        name for name, lo, hi in zip(train.schema.feature_names, mins, maxs) if lo == hi
    )
    return Scaler(
        feature_names=train.schema.feature_names,
        mins=mins,
        maxs=maxs,
        constant_columns=constant,
    )


def scaler_apply(scaler: Scaler, data: Dataset) -> Dataset:
    """Map features through (x - min) / (max - min) without clamping.

    Values outside the training range extrapolate linearly beyond [0, 1].
    Constant training columns map to 0.0. The target column is untouched.
    """
    if data.schema.feature_names != scaler.feature_names:
        raise SchemaMismatchError(
            f"scaler fitted on {scaler.feature_names}, got {data.schema.feature_names}"
        )
    out = np.array(data.values, dtype=float)
    span = scaler.maxs - scaler.mins
    for k, name in enumerate(scaler.feature_names):
        j = data.schema.index_of(name)
        if span[k] == 0:
            out[:, j] = 0.0
        else:
            out[:, j] = (out[:, j] - scaler.mins[k]) / span[k]
    return replace(data, values=out)


def target_log_transform(data: Dataset) -> Dataset:
    """Replace the target column with its base-10 logarithm."""
    if data.target_space != "cycles":
        raise InvalidSpecError("target already log-transformed")
    tgt = data.target()
    if data.n_rows and np.any(tgt <= 0):
        raise NonPositiveTargetError("log transform requires strictly positive targets")
    out = np.array(data.values, dtype=float)
    out[:, data.schema.index_of(data.schema.target_column)] = np.log10(tgt)
    return replace(data, values=out, target_space="log10")


def target_log_inverse(y):
    """Invert the log transform: log10 life back to cycles."""
    return np.power(10.0, y)


@dataclass(frozen=True)
class FoldPlan:
    """Disjoint row-index assignment for k-fold cross-validation."""

    k: int
    assignments: tuple[np.ndarray, ...]
    seed: int

    def train_test(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        test = self.assignments[fold]
        train = np.concatenate([a for i, a in enumerate(self.assignments) if i != fold])
        return np.sort(train), np.sort(test)


def kfold_split(n: int, k: int, seed: int) -> FoldPlan:
    """Seeded uniform shuffle followed by a contiguous partition.

    The first ``n mod k`` folds receive one extra row, so fold sizes differ
    by at most one. Identical (n, k, seed) always yields identical folds.
    """
    if not 2 <= k <= n:
        raise InvalidKError(f"need 2 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    base, extra = divmod(n, k)
    sizes = [base + 1 if i < extra else base for i in range(k)]
    assignments = []
    start = 0
    for s in sizes:
        assignments.append(np.array(perm[start : start + s], dtype=int))
        start += s
    return FoldPlan(k=k, assignments=tuple(assignments), seed=seed)


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic power-law S-N dataset.

    Life follows ``(stress / c) ** (1 / m)`` with additive Gaussian noise of
    standard deviation ``noise_sigma`` on log10 life, floored at one cycle.
    ``n_nuisance`` irrelevant uniform columns can be appended to exercise
    feature selection behavior.
    """

    c: float
    m: float
    noise_sigma: float
    n: int
    stress_range: tuple[float, float] = (400.0, 1200.0)
    n_nuisance: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.c <= 0:
            raise InvalidSpecError(f"c must be > 0, got {self.c}")
        if self.m >= 0:
            raise InvalidSpecError(f"m must be < 0, got {self.m}")
        if self.noise_sigma < 0:
            raise InvalidSpecError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.n < 1:
            raise InvalidSpecError(f"n must be >= 1, got {self.n}")
        lo, hi = self.stress_range
        if not (0 < lo < hi):
            raise InvalidSpecError(f"stress_range must satisfy 0 < low < high, got {self.stress_range}")
        if self.n_nuisance < 0:
            raise InvalidSpecError(f"n_nuisance must be >= 0, got {self.n_nuisance}")


def synth_schema(n_nuisance: int) -> DatasetSchema:
    cols = [("stress", "condition")]
    cols += [(f"nuisance_{i}", "measurement") for i in range(n_nuisance)]
    cols += [("fatigue_life", "target")]
    return DatasetSchema(
        columns=tuple(cols), stress_column="stress", target_column="fatigue_life"
    )


def synth_generate(spec: SynthSpec) -> Dataset:
    """Generate a synthetic dataset from a power-law S-N curve."""
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.stress_range
    stress = rng.uniform(lo, hi, size=spec.n)
    log10_life = (np.log10(stress) - math.log10(spec.c)) / spec.m
    if spec.noise_sigma > 0:
        log10_life = log10_life + rng.normal(0.0, spec.noise_sigma, size=spec.n)
    life = np.maximum(np.power(10.0, log10_life), 1.0)
    columns = [stress]
    for _ in range(spec.n_nuisance):
        columns.append(rng.uniform(0.0, 1.0, size=spec.n))
    columns.append(life)
    values = np.column_stack(columns)
    tag = hashlib.sha256(repr(spec).encode()).hexdigest()[:12]
    return Dataset(
        schema=synth_schema(spec.n_nuisance),
        values=values,
        provenance=f"synthetic:{tag}",
    )
