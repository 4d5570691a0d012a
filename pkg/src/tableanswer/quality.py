"""Query-independent table quality features.

These describe how table-like the extracted grid actually is: size, how
many cells are empty, whether columns hold one consistent kind of value,
and how distinct the subject column is.  They feed the classifier next to
the similarity features.
"""

from dataclasses import dataclass

from .extraction import ExtractedTable, distinct_fraction, is_numeric_cell, is_numeric_column

__all__ = ["QualityFeatures", "compute_quality", "cell_type"]


@dataclass
class QualityFeatures:
    n_rows: int
    n_cols: int
    empty_cell_fraction: float
    has_column_names: bool
    has_numeric_column: bool
    numeric_column_count: int
    subject_distinct_fraction: float
    type_consistency_mean: float
    type_consistency_min: float


def cell_type(text):
    """One of 'number', 'string', 'string_with_digits' for a non-empty cell."""
    if is_numeric_cell(text):
        return "number"
    if any(c.isdigit() for c in text):
        return "string_with_digits"
    return "string"


def _column_consistency(cells):
    """Fraction of non-empty cells sharing the column's majority type.

    A column with no non-empty cells counts as fully consistent; its
    emptiness is already captured by empty_cell_fraction.
    """
    non_empty = [c for c in cells if c.strip()]
    if not non_empty:
        return 1.0
    counts = {}
    for c in non_empty:
        t = cell_type(c)
        counts[t] = counts.get(t, 0) + 1
    return max(counts.values()) / len(non_empty)


def compute_quality(table: ExtractedTable) -> QualityFeatures:
    grid = table.grid
    n_rows = table.n_rows
    n_cols = table.n_cols
    total = n_rows * n_cols
    empty = sum(1 for row in grid for c in row if not c.strip())

    columns = [[row[j] for row in grid] for j in range(n_cols)]
    consistency = [_column_consistency(col) for col in columns]
    numeric_count = sum(1 for col in columns if is_numeric_column(col))

    if table.subject_col is not None:
        subject_distinct = distinct_fraction(columns[table.subject_col])
    else:
        subject_distinct = 0.0

    return QualityFeatures(
        n_rows=n_rows,
        n_cols=n_cols,
        empty_cell_fraction=empty / total if total else 0.0,
        has_column_names=bool(table.metadata.column_names),
        has_numeric_column=numeric_count > 0,
        numeric_column_count=numeric_count,
        subject_distinct_fraction=subject_distinct,
        type_consistency_mean=sum(consistency) / len(consistency) if consistency else 1.0,
        type_consistency_min=min(consistency) if consistency else 1.0,
    )
