import os
from pathlib import Path

import numpy as np
import pytest

from gkmnc.dataset import Attribute, AttributeKind, Schema, make_table

DATA_DIR = Path(os.environ.get("GKMNC_DATA", Path(__file__).resolve().parent.parent / "data"))


def dataset_path(name: str) -> Path:
    """Path of a real-dataset file, or skip the test when it is absent.

    The build sandbox has no network route to the public dataset archives;
    run scripts/fetch_datasets.py on a networked machine (or drop the files
    into data/) to enable these tests.
    """
    path = DATA_DIR / name
    if not path.exists():
        pytest.skip(
            f"dataset file {path} not available in this environment; "
            "run scripts/fetch_datasets.py with network access to create it"
        )
    return path


@pytest.fixture
def credit_schema() -> Schema:
    return Schema(
        attributes=(
            Attribute("status", AttributeKind.NOMINAL),
            Attribute("amount", AttributeKind.NUMERIC),
            Attribute("age", AttributeKind.NUMERIC),
            Attribute("account_id", AttributeKind.IDENTIFIER),
            Attribute("class", AttributeKind.TARGET),
        ),
        positive_label="good",
    )


@pytest.fixture
def numeric_only_schema() -> Schema:
    return Schema(
        attributes=(
            Attribute("x1", AttributeKind.NUMERIC),
            Attribute("x2", AttributeKind.NUMERIC),
            Attribute("class", AttributeKind.TARGET),
        ),
        positive_label="pos",
    )


def two_blob_table(schema: Schema, n_per_class: int = 30, spread: float = 1.0, seed: int = 0,
                   center: float = 5.0):
    """Linearly separable two-class table on the numeric-only schema."""
    rng = np.random.default_rng(seed)
    pos = rng.normal(center, spread, size=(n_per_class, 2))
    neg = rng.normal(-center, spread, size=(n_per_class, 2))
    numeric = np.vstack([pos, neg])
    targets = np.array([1] * n_per_class + [-1] * n_per_class)
    return make_table(schema, numeric, [[] for _ in range(2 * n_per_class)], targets)
