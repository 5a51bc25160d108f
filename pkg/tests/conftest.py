"""Shared builders for the test suite."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from cmla.clustering import Medoid, MedoidSet
from cmla.encoding import EncodedMatrix
from cmla.tables import CATEGORICAL, NUMERIC, ColumnSpec, DataTable, TableSchema

DATA_DIR = Path(__file__).parent / "data"


def numeric_table(values, names=None, origin="test") -> DataTable:
    """DataTable of float64 columns from a 1-d or 2-d array-like."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    names = list(names) if names is not None else [f"x{j}" for j in range(arr.shape[1])]
    specs = tuple(ColumnSpec(n, NUMERIC) for n in names)
    cols = tuple(np.ascontiguousarray(arr[:, j]) for j in range(arr.shape[1]))
    return DataTable(TableSchema(specs), cols, origin=origin)


def mixed_table(numeric=None, categorical=None, origin="test") -> DataTable:
    """numeric: {name: values}; categorical: {name: cell labels}. Vocabularies
    follow first appearance, like the CSV loader."""
    specs: list[ColumnSpec] = []
    cols: list[np.ndarray] = []
    for name, vals in (numeric or {}).items():
        specs.append(ColumnSpec(name, NUMERIC))
        cols.append(np.asarray(vals, dtype=np.float64))
    for name, labels in (categorical or {}).items():
        vocab = list(dict.fromkeys(labels))
        specs.append(ColumnSpec(name, CATEGORICAL, tuple(vocab)))
        cols.append(np.array([vocab.index(v) for v in labels], dtype=np.int32))
    return DataTable(TableSchema(tuple(specs)), tuple(cols), origin=origin)


def matrix(vectors, model_hash="m0") -> EncodedMatrix:
    vs = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    return EncodedMatrix(np.ascontiguousarray(vs), model_hash)


def medoid_set(vectors, model_hash="m0", row_ids=None) -> MedoidSet:
    vs = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    ids = list(row_ids) if row_ids is not None else list(range(len(vs)))
    meds = [
        Medoid(cluster_id=i, row_id=ids[i], vector=vs[i].copy(), raw=())
        for i in range(len(vs))
    ]
    return MedoidSet(medoids=meds, cluster_sizes=[1] * len(vs), model_hash=model_hash)


def clustered_cloud(rng: np.random.Generator, n: int, d: int, duplicates: float = 0.0):
    """Blobby point cloud with background scatter and optional exact
    duplicates, the randomized input for clustering tests."""
    k = int(rng.integers(1, 5))
    centers = rng.uniform(-4.0, 4.0, size=(k, d))
    x = centers[rng.integers(0, k, size=n)] + rng.normal(0.0, 0.35, size=(n, d))
    scatter = max(1, n // 10)
    x[:scatter] = rng.uniform(-5.0, 5.0, size=(scatter, d))
    m = int(n * duplicates)
    if m and n >= 2:
        x[rng.integers(0, n, size=m)] = x[rng.integers(0, n, size=m)]
    return np.ascontiguousarray(x)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
