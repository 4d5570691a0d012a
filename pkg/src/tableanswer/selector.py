"""Thresholded argmax selection of the answer table.

Every candidate is scored by the classifier; the best one is returned
only if its score strictly exceeds the threshold, otherwise the result is
empty.  Ties go to the earlier document, then the earlier table within
it, which makes the outcome independent of candidate ordering.
"""

from dataclasses import dataclass

from .classifier import BoostedModel, predict
from .extraction import ExtractedTable

__all__ = ["SelectionResult", "select"]


@dataclass
class SelectionResult:
    """Empty, or the chosen table with its score and runner-up margin."""

    key: tuple = None  # (doc_rank, table_index)
    score: float = None
    margin: float = None  # None when there was no runner-up
    table: ExtractedTable = None

    @property
    def empty(self):
        return self.key is None


def select(query_tokens, candidates, model: BoostedModel, theta) -> SelectionResult:
    """Pick argmax F(Q,T) over candidates if it clears theta.

    candidates: list of (ExtractedTable, FeatureVector).  The query
    tokens are accepted for interface symmetry; scores come entirely from
    the pre-assembled feature vectors.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    if not candidates:
        return SelectionResult()

    scored = []
    for table, fv in candidates:
        score = predict(model, fv)
        scored.append((-score, table.doc_rank, table.table_index, score, table))
    scored.sort(key=lambda t: t[:3])
    _, _, _, best_score, best_table = scored[0]
    if best_score <= theta:
        return SelectionResult()
    margin = best_score - scored[1][3] if len(scored) > 1 else None
    return SelectionResult(
        key=(best_table.doc_rank, best_table.table_index),
        score=best_score,
        margin=margin,
        table=best_table,
    )
