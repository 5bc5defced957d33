"""Entropy, information gain, split information, and gain ratio over nominal
attributes, plus grouping-attribute selection and dataset partitioning.

All entropies are in bits (log base 2). The gain ratio of an attribute is
its information gain divided by its split information; single-valued
attributes have zero split information and are excluded from selection
because the ratio is undefined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import DataTable
from .errors import AllZero, EmptyInput, SplitInfoZero


def entropy(class_counts: Sequence[int] | np.ndarray) -> float:
    """Shannon entropy in bits of a count vector, with 0*log(0) = 0."""
    counts = np.asarray(class_counts, dtype=float)
    if counts.size == 0 or counts.sum() <= 0:
        raise AllZero("entropy needs at least one nonzero count")
    if (counts < 0).any():
        raise AllZero("counts must be nonnegative")
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum())


def gain_ratio(table: DataTable, attribute_index: int) -> tuple[float, float, float]:
    """(info_gain, split_info, gain_ratio) of a nominal attribute.

    info_gain = H(target) - sum_v (n_v/n) H(target | attribute=v)
    split_info = H over the attribute's value frequencies
    """
    if table.n_rows == 0:
        raise EmptyInput("gain ratio over an empty table")
    if table.targets is None:
        raise EmptyInput("gain ratio needs target labels")
    values = table.nominal_column(attribute_index)
    y = table.targets
    h_class = entropy(np.bincount((y == 1).astype(int), minlength=2))
    n = table.n_rows

    labels, inverse, value_counts = np.unique(values, return_inverse=True, return_counts=True)
    conditional = 0.0
    for j in range(len(labels)):
        sub = y[inverse == j]
        counts = np.bincount((sub == 1).astype(int), minlength=2)
        conditional += (value_counts[j] / n) * entropy(counts)
    info_gain = max(h_class - conditional, 0.0)

    if len(labels) < 2:
        raise SplitInfoZero(
            f"attribute {attribute_index} is single-valued; gain ratio undefined"
        )
    split_info = entropy(value_counts)
    return info_gain, split_info, info_gain / split_info


@dataclass(frozen=True)
class GainRatioEntry:
    attribute_index: int
    name: str
    info_gain: float
    split_info: float
    gain_ratio: float
    excluded: bool
    reason: str = ""


@dataclass(frozen=True)
class GainRatioReport:
    """Per-nominal-attribute gain statistics with selection ranks."""

    entries: tuple[GainRatioEntry, ...]

    def ranked(self) -> list[GainRatioEntry]:
        """Included entries, best gain ratio first."""
        usable = [e for e in self.entries if not e.excluded]
        return sorted(usable, key=lambda e: (-e.gain_ratio, e.attribute_index))

    def to_table_text(self) -> str:
        """Delimited report: attribute, gain ratio, rank."""
        rank_of = {e.attribute_index: i + 1 for i, e in enumerate(self.ranked())}
        lines = ["attribute,name,gain_ratio,rank"]
        for e in self.entries:
            rank = str(rank_of[e.attribute_index]) if e.attribute_index in rank_of else ""
            gr = "" if e.excluded else f"{e.gain_ratio:.6f}"
            lines.append(f"{e.attribute_index},{e.name},{gr},{rank}")
        return "\n".join(lines) + "\n"


def compute_gain_report(table: DataTable) -> GainRatioReport:
    """Gain statistics for every nominal attribute of the table."""
    entries = []
    for idx in table.schema.nominal_indices():
        name = table.schema.feature_by_index(idx).name
        try:
            ig, si, gr = gain_ratio(table, idx)
            entries.append(GainRatioEntry(idx, name, ig, si, gr, excluded=False))
        except SplitInfoZero:
            entries.append(
                GainRatioEntry(idx, name, 0.0, 0.0, 0.0, excluded=True, reason="single-valued")
            )
    return GainRatioReport(tuple(entries))


def select_grouping_attribute(
    table: DataTable, threshold: float = 0.01
) -> tuple[int | None, GainRatioReport]:
    """Pick the nominal attribute with the largest gain ratio if it clears
    the significance threshold; ties break toward the lowest index.

    Returns (index or None, full report). A None selection means no nominal
    attribute groups the data usefully and the caller should fall back to a
    universal model.
    """
    report = compute_gain_report(table)
    ranked = report.ranked()
    if not ranked or ranked[0].gain_ratio <= threshold:
        return None, report
    return ranked[0].attribute_index, report


def partition_by_attribute(table: DataTable, attribute_index: int) -> dict[str, DataTable]:
    """Split a table into per-label sub-tables of one nominal attribute.

    Every row lands in exactly one group; keys are the raw labels, in
    sorted order for stable reports.
    """
    values = table.nominal_column(attribute_index)
    groups: dict[str, DataTable] = {}
    for label in sorted(set(values.tolist())):
        groups[label] = table.take(np.flatnonzero(values == label))
    return groups
