"""CSV-backed tables with a typed, ordered schema.

The loader reads an RFC-4180 style format: comma delimiter, double-quote
quoting, UTF-8, one mandatory header row. Column kinds are inferred unless a
schema hint pins them: a column is numeric when every non-empty cell parses as
a finite decimal, otherwise it is categorical and its vocabulary is the
distinct cell values in first-appearance order. A missing cell in a numeric
column is a load error; the empty string is a legitimate category. The loader
never imputes, drops, or deduplicates rows.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import LoadError, SchemaError

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class ColumnSpec:
    """One column: name, kind, and (for categoricals) an ordered vocabulary."""

    name: str
    kind: str
    categories: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SchemaError(f"unknown column kind {self.kind!r} for column {self.name!r}")
        if self.kind == NUMERIC and self.categories:
            raise SchemaError(f"numeric column {self.name!r} cannot carry a vocabulary")


@dataclass(frozen=True)
class TableSchema:
    columns: tuple[ColumnSpec, ...]

    def __post_init__(self) -> None:
        if not self.columns:
            raise SchemaError("schema has no columns")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names in schema")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"no column named {name!r}")

    def numeric_columns(self) -> tuple[ColumnSpec, ...]:
        return tuple(c for c in self.columns if c.kind == NUMERIC)

    def categorical_columns(self) -> tuple[ColumnSpec, ...]:
        return tuple(c for c in self.columns if c.kind == CATEGORICAL)


@dataclass(eq=False)
class DataTable:
    """In-memory table. Numeric columns are float64 arrays, categorical columns
    are int32 indices into the column vocabulary. Row ids are the stable
    0-based row positions and never change after load.
    """

    schema: TableSchema
    columns: tuple[np.ndarray, ...]
    origin: str = ""

    def __post_init__(self) -> None:
        if len(self.columns) != len(self.schema.columns):
            raise SchemaError("column arrays do not match the schema")
        lengths = {len(c) for c in self.columns}
        if len(lengths) > 1:
            raise SchemaError("column arrays have unequal lengths")

    @property
    def n_rows(self) -> int:
        return int(len(self.columns[0]))

    def column_array(self, name: str) -> np.ndarray:
        for spec, arr in zip(self.schema.columns, self.columns):
            if spec.name == name:
                return arr
        raise SchemaError(f"no column named {name!r}")

    def row(self, row_id: int) -> tuple:
        """Decode one row to raw cell values (floats and category strings)."""
        cells = []
        for spec, arr in zip(self.schema.columns, self.columns):
            if spec.kind == NUMERIC:
                cells.append(float(arr[row_id]))
            else:
                cells.append(spec.categories[int(arr[row_id])])
        return tuple(cells)


def _parse_decimal(cell: str) -> float | None:
    """Return the finite float value of a cell, or None when it has none."""
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def load_csv(
    path: str | Path,
    schema_hint: TableSchema | None = None,
    origin: str | None = None,
) -> DataTable:
    """Load a CSV file into a DataTable.

    With a schema hint the header must match the hinted column names exactly
    and the hinted kinds are enforced; categorical vocabularies start from the
    hint and extend by first appearance, so a write/reload round trip under the
    same schema is index-stable. Without a hint, kinds are inferred from the
    cells. Error rows are reported 1-based over data rows (header excluded).
    """
    p = Path(path)
    if not p.is_file():
        raise LoadError(f"no such file: {p}")
    with open(p, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LoadError(f"{p.name}: missing header row") from None
        rows = list(reader)

    n_cols = len(header)
    if n_cols == 0:
        raise LoadError(f"{p.name}: header row has no columns")
    for i, r in enumerate(rows, start=1):
        if len(r) != n_cols:
            raise LoadError(f"{p.name}: row {i} has {len(r)} fields, expected {n_cols}")
    if not rows:
        raise LoadError(f"{p.name}: no data rows")

    if schema_hint is not None:
        if tuple(header) != schema_hint.names:
            raise LoadError(
                f"{p.name}: header {header!r} does not match expected columns "
                f"{list(schema_hint.names)!r}"
            )
        kinds = [c.kind for c in schema_hint.columns]
    else:
        kinds = []
        for j in range(n_cols):
            numeric = all(_parse_decimal(r[j]) is not None for r in rows if r[j] != "")
            kinds.append(NUMERIC if numeric else CATEGORICAL)

    arrays: list[np.ndarray] = []
    specs: list[ColumnSpec] = []
    for j, kind in enumerate(kinds):
        name = header[j]
        if kind == NUMERIC:
            values = np.empty(len(rows), dtype=np.float64)
            for i, r in enumerate(rows):
                v = _parse_decimal(r[j])
                if v is None:
                    raise LoadError(
                        f"{p.name}: row {i + 1}, column {name!r}: "
                        f"cell {r[j]!r} is not a finite decimal"
                    )
                values[i] = v
            arrays.append(values)
            specs.append(ColumnSpec(name, NUMERIC))
        else:
            vocab: dict[str, int] = {}
            if schema_hint is not None:
                for cat in schema_hint.columns[j].categories:
                    vocab[cat] = len(vocab)
            codes = np.empty(len(rows), dtype=np.int32)
            for i, r in enumerate(rows):
                cell = r[j]
                if cell not in vocab:
                    vocab[cell] = len(vocab)
                codes[i] = vocab[cell]
            arrays.append(codes)
            specs.append(ColumnSpec(name, CATEGORICAL, tuple(vocab)))

    schema = TableSchema(tuple(specs))
    return DataTable(schema, tuple(arrays), origin=origin if origin is not None else p.stem)


def write_csv(table: DataTable, path: str | Path) -> None:
    """Write a table back to CSV. Numeric cells use repr(float), the shortest
    form that reloads to the identical value."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(table.schema.names)
        for i in range(table.n_rows):
            writer.writerow(
                repr(v) if isinstance(v, float) else v for v in table.row(i)
            )


def unify_schema(synthetic: DataTable, real: DataTable | None = None) -> TableSchema:
    """Return the shared schema for an audit: the synthetic table's schema.

    The real table, when given, must match on column names and kinds.
    Vocabularies come from the synthetic table only; real-only categories are
    handled downstream by the encoder, never merged into the schema.
    """
    if real is None:
        return synthetic.schema
    problems = []
    if synthetic.schema.names != real.schema.names:
        problems.append(
            f"column names differ: synthetic {list(synthetic.schema.names)!r} "
            f"vs real {list(real.schema.names)!r}"
        )
    else:
        for s_col, r_col in zip(synthetic.schema.columns, real.schema.columns):
            if s_col.kind != r_col.kind:
                problems.append(
                    f"column {s_col.name!r} is {s_col.kind} in the synthetic table "
                    f"but {r_col.kind} in the real table"
                )
    if problems:
        raise SchemaError("; ".join(problems))
    return synthetic.schema
