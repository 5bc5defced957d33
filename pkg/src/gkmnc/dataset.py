"""Tabular data handling: schema files, CSV loading, z-score normalization,
and cross-validation fold splitting.

A dataset is a CSV file with one header row plus a sidecar schema file of
``name = kind`` lines (kinds: nominal, numeric, identifier, target) and one
``positive_label = <text>`` line. The target column is mapped to +1 for the
positive label and -1 for anything else. Identifier columns are carried
along but excluded from all modeling.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    KTooLarge,
    MissingColumn,
    SchemaError,
    TypeMismatch,
    UnknownTargetLabel,
)

MISSING_NOMINAL = "?"


class AttributeKind(str, Enum):
    NOMINAL = "nominal"
    NUMERIC = "numeric"
    IDENTIFIER = "identifier"
    TARGET = "target"


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: AttributeKind


@dataclass(frozen=True)
class Schema:
    """Ordered attribute declarations plus the target's positive label.

    Attribute indices used throughout reports and model names are 1-based
    positions among the non-target attributes, in file column order.
    """

    attributes: tuple[Attribute, ...]
    positive_label: str

    def __post_init__(self) -> None:
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError("attribute names must be unique")
        targets = [a for a in self.attributes if a.kind == AttributeKind.TARGET]
        if len(targets) != 1:
            raise SchemaError(f"schema must declare exactly one target, found {len(targets)}")
        if not any(a.kind == AttributeKind.NUMERIC for a in self.attributes):
            raise SchemaError("schema needs at least one numeric attribute")
        if not self.positive_label:
            raise SchemaError("positive_label must be non-empty")

    @property
    def target_name(self) -> str:
        return next(a.name for a in self.attributes if a.kind == AttributeKind.TARGET)

    @property
    def features(self) -> tuple[Attribute, ...]:
        """Non-target attributes in declaration order (1-based index space)."""
        return tuple(a for a in self.attributes if a.kind != AttributeKind.TARGET)

    @property
    def numeric_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.features if a.kind == AttributeKind.NUMERIC)

    @property
    def nominal_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.features if a.kind == AttributeKind.NOMINAL)

    def nominal_indices(self) -> tuple[int, ...]:
        """1-based indices of nominal attributes among the features."""
        return tuple(
            i + 1 for i, a in enumerate(self.features) if a.kind == AttributeKind.NOMINAL
        )

    def attribute_index(self, name: str) -> int:
        """1-based feature index of a named attribute."""
        for i, a in enumerate(self.features):
            if a.name == name:
                return i + 1
        raise SchemaError(f"unknown attribute {name!r}")

    def feature_by_index(self, index: int) -> Attribute:
        if not 1 <= index <= len(self.features):
            raise SchemaError(f"attribute index {index} out of range 1..{len(self.features)}")
        return self.features[index - 1]


def load_schema(path: str | Path) -> Schema:
    """Parse a sidecar schema file of ``name = kind`` lines."""
    attributes: list[Attribute] = []
    positive_label: str | None = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SchemaError(f"{path}:{lineno}: expected 'name = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "positive_label":
            positive_label = value
            continue
        try:
            kind = AttributeKind(value)
        except ValueError:
            raise SchemaError(
                f"{path}:{lineno}: unknown attribute kind {value!r} for {key!r}"
            ) from None
        attributes.append(Attribute(key, kind))
    if positive_label is None:
        raise SchemaError(f"{path}: missing positive_label line")
    return Schema(tuple(attributes), positive_label)


@dataclass(frozen=True)
class DataTable:
    """Immutable row store split by attribute kind.

    numeric:  (n, n_numeric) float matrix, columns in schema numeric order.
    nominal:  (n, n_nominal) object matrix of text labels.
    identifiers: (n, n_identifier) object matrix, raw text, never modeled.
    targets:  (n,) int vector in {+1, -1}, or None for unlabeled tables.
    """

    schema: Schema
    numeric: np.ndarray
    nominal: np.ndarray
    identifiers: np.ndarray
    targets: np.ndarray | None

    def __post_init__(self) -> None:
        for arr in (self.numeric, self.nominal, self.identifiers):
            arr.setflags(write=False)
        if self.targets is not None:
            self.targets.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.numeric.shape[0]

    def nominal_column(self, attribute_index: int) -> np.ndarray:
        """Values of a nominal attribute, addressed by 1-based feature index."""
        attr = self.schema.feature_by_index(attribute_index)
        if attr.kind != AttributeKind.NOMINAL:
            raise SchemaError(f"attribute {attribute_index} ({attr.name}) is not nominal")
        col = self.schema.nominal_names.index(attr.name)
        return self.nominal[:, col]

    def take(self, indices: Sequence[int] | np.ndarray) -> "DataTable":
        idx = np.asarray(indices, dtype=int)
        return DataTable(
            schema=self.schema,
            numeric=self.numeric[idx].copy(),
            nominal=self.nominal[idx].copy(),
            identifiers=self.identifiers[idx].copy(),
            targets=None if self.targets is None else self.targets[idx].copy(),
        )

    def iter_records(self) -> Iterator[dict[str, object]]:
        """Yield raw per-row records keyed by attribute name (target included
        when present)."""
        num_names = self.schema.numeric_names
        nom_names = self.schema.nominal_names
        id_names = tuple(
            a.name for a in self.schema.features if a.kind == AttributeKind.IDENTIFIER
        )
        for i in range(self.n_rows):
            rec: dict[str, object] = {}
            rec.update(zip(nom_names, self.nominal[i]))
            rec.update(zip(num_names, self.numeric[i]))
            rec.update(zip(id_names, self.identifiers[i]))
            if self.targets is not None:
                rec[self.schema.target_name] = int(self.targets[i])
            yield rec

    def class_counts(self) -> tuple[int, int]:
        """(positive, negative) target counts."""
        if self.targets is None:
            raise EmptyInput("table carries no targets")
        pos = int(np.sum(self.targets == 1))
        return pos, self.n_rows - pos


def load_table(path: str | Path, schema: Schema) -> DataTable:
    """Load and validate a comma-delimited file against a schema.

    The header must name every schema attribute (any column order); the
    target column may be absent, producing an unlabeled table. Empty nominal
    cells become the literal category "?"; empty or non-numeric cells in
    numeric columns are rejected.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TypeMismatch(f"{path}: file has no header row") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            dupes = sorted({h for h in header if header.count(h) > 1})
            raise SchemaError(f"{path}: duplicated header columns {dupes}")
        known = {a.name for a in schema.attributes}
        for col in header:
            if col not in known:
                raise SchemaError(f"{path}: column {col!r} not declared in schema")
        positions = {name: header.index(name) for name in header}
        for attr in schema.features:
            if attr.name not in positions:
                raise MissingColumn(f"{path}: required column {attr.name!r} missing")
        has_target = schema.target_name in positions

        numeric_rows: list[list[float]] = []
        nominal_rows: list[list[str]] = []
        id_rows: list[list[str]] = []
        target_vals: list[int] = []
        num_attrs = [a.name for a in schema.features if a.kind == AttributeKind.NUMERIC]
        nom_attrs = [a.name for a in schema.features if a.kind == AttributeKind.NOMINAL]
        id_attrs = [a.name for a in schema.features if a.kind == AttributeKind.IDENTIFIER]

        for rowno, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise TypeMismatch(
                    f"{path}: row {rowno} has {len(row)} fields, expected {len(header)}"
                )
            nums = []
            for name in num_attrs:
                token = row[positions[name]].strip()
                try:
                    nums.append(float(token))
                except ValueError:
                    raise TypeMismatch(
                        f"{path}: row {rowno}, column {name!r}: {token!r} is not numeric"
                    ) from None
            numeric_rows.append(nums)
            nominal_rows.append(
                [row[positions[name]].strip() or MISSING_NOMINAL for name in nom_attrs]
            )
            id_rows.append([row[positions[name]].strip() for name in id_attrs])
            if has_target:
                token = row[positions[schema.target_name]].strip()
                if not token:
                    raise UnknownTargetLabel(
                        f"{path}: row {rowno}: empty target value"
                    )
                target_vals.append(1 if token == schema.positive_label else -1)

    n = len(numeric_rows)
    return DataTable(
        schema=schema,
        numeric=np.array(numeric_rows, dtype=float).reshape(n, len(num_attrs)),
        nominal=np.array(nominal_rows, dtype=object).reshape(n, len(nom_attrs)),
        identifiers=np.array(id_rows, dtype=object).reshape(n, len(id_attrs)),
        targets=np.array(target_vals, dtype=int) if has_target else None,
    )


@dataclass(frozen=True)
class FoldSplit:
    fold_index: int
    train: DataTable
    validation: DataTable


def split_folds(table: DataTable, k: int, seed: int) -> list[FoldSplit]:
    """Deterministic k-fold split: every row lands in exactly one validation
    fold and fold sizes differ by at most one row."""
    if k < 2:
        raise KTooLarge(f"need at least 2 folds, got {k}")
    if k > table.n_rows:
        raise KTooLarge(f"{k} folds exceed {table.n_rows} rows")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(table.n_rows)
    splits = []
    for i in range(k):
        val_idx = np.sort(perm[i::k])
        train_mask = np.ones(table.n_rows, dtype=bool)
        train_mask[val_idx] = False
        splits.append(
            FoldSplit(
                fold_index=i,
                train=table.take(np.flatnonzero(train_mask)),
                validation=table.take(val_idx),
            )
        )
    return splits


@dataclass(frozen=True)
class NormalizationParams:
    """Per-feature standardization statistics (population form, divisor n)."""

    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.mean, self.std, self.constant):
            arr.setflags(write=False)

    @property
    def n_features(self) -> int:
        return self.mean.shape[0]


def fit_normalizer(rows: np.ndarray) -> NormalizationParams:
    """Fit per-column mean and population standard deviation; zero-variance
    columns are flagged constant and later map to 0."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2:
        rows = rows.reshape(len(rows), -1)
    if rows.shape[0] == 0:
        raise EmptyInput("cannot fit a normalizer on zero rows")
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)
    return NormalizationParams(mean=mean, std=std, constant=std == 0.0)


def apply_normalizer(params: NormalizationParams, rows: np.ndarray) -> np.ndarray:
    """(x - mean) / std per column; constant columns map to 0."""
    rows = np.asarray(rows, dtype=float)
    if rows.shape[-1] != params.n_features:
        raise DimensionMismatch(
            f"got {rows.shape[-1]} features, normalizer has {params.n_features}"
        )
    safe_std = np.where(params.constant, 1.0, params.std)
    out = (rows - params.mean) / safe_std
    if params.constant.any():
        out = np.where(params.constant, 0.0, out)
    return out


def invert_normalizer(params: NormalizationParams, rows: np.ndarray) -> np.ndarray:
    """Undo apply_normalizer; constant columns recover their mean."""
    rows = np.asarray(rows, dtype=float)
    if rows.shape[-1] != params.n_features:
        raise DimensionMismatch(
            f"got {rows.shape[-1]} features, normalizer has {params.n_features}"
        )
    return rows * np.where(params.constant, 0.0, params.std) + params.mean


def make_table(
    schema: Schema,
    numeric: np.ndarray,
    nominal: Sequence[Sequence[str]] | np.ndarray,
    targets: Sequence[int] | np.ndarray | None,
    identifiers: Sequence[Sequence[str]] | np.ndarray | None = None,
) -> DataTable:
    """Assemble a DataTable from in-memory arrays (test and tooling helper)."""
    numeric = np.asarray(numeric, dtype=float)
    n = numeric.shape[0]
    nom = np.asarray(nominal, dtype=object)
    nom = nom.reshape(n, -1) if nom.size else np.empty((n, 0), dtype=object)
    ids = np.asarray(identifiers, dtype=object) if identifiers is not None else np.empty(0)
    ids = ids.reshape(n, -1) if ids.size else np.empty((n, 0), dtype=object)
    tg = None if targets is None else np.asarray(targets, dtype=int)
    return DataTable(schema=schema, numeric=numeric, nominal=nom, identifiers=ids, targets=tg)
