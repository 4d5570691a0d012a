"""Precision/recall over threshold sweeps, for the classifier and the
end-to-end selector.

Classifier counting is per (query, table) pair against a score threshold.
Selector counting is per query: each query either returns one table or
nothing, and a missed return only counts against recall when the query
actually had a correct table on offer.  True negatives are never counted,
so a query with no positive pair and no returned table affects nothing.
"""

import json
from dataclasses import dataclass

__all__ = [
    "PrPoint", "default_thresholds", "classifier_pr", "selector_pr",
    "write_pr_csv", "write_pr_json", "pr_points_to_rows",
]

EVAL_SCHEMA_VERSION = 1


@dataclass
class PrPoint:
    threshold: float
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    precision_undefined: bool = False  # tp+fp was 0; precision reported as 1.0
    recall_undefined: bool = False  # tp+fn was 0; recall reported as 0.0


def default_thresholds():
    """The 101-point grid 0.00, 0.01, ..., 1.00."""
    return [i / 100.0 for i in range(101)]


def _make_point(threshold, tp, fp, fn):
    precision_undefined = (tp + fp) == 0
    recall_undefined = (tp + fn) == 0
    precision = 1.0 if precision_undefined else tp / (tp + fp)
    recall = 0.0 if recall_undefined else tp / (tp + fn)
    return PrPoint(threshold=float(threshold), tp=tp, fp=fp, fn=fn,
                   precision=precision, recall=recall,
                   precision_undefined=precision_undefined,
                   recall_undefined=recall_undefined)


def classifier_pr(scored_pairs, thresholds=None):
    """Sweep alpha over (score, label) pairs.

    tp: score >= alpha and label 1; fp: score >= alpha and label 0;
    fn: score < alpha and label 1.
    """
    if thresholds is None:
        thresholds = default_thresholds()
    points = []
    for alpha in thresholds:
        tp = fp = fn = 0
        for score, label in scored_pairs:
            if score >= alpha:
                if label == 1:
                    tp += 1
                else:
                    fp += 1
            elif label == 1:
                fn += 1
        points.append(_make_point(alpha, tp, fp, fn))
    return points


def _query_outcome(candidates):
    """(best score, best label, query has a positive) or None if no candidates.

    The best candidate is the same argmax the selector would pick: highest
    score, ties to lower doc_rank then lower table_index.
    """
    if not candidates:
        return None
    best = min(candidates, key=lambda c: (-c[0], c[2], c[3]))
    has_positive = any(label == 1 for _, label, _, _ in candidates)
    return best[0], best[1], has_positive


def selector_pr(per_query_candidates, thresholds=None):
    """Sweep theta over per-query candidate lists.

    Each query is a list of (score, label, doc_rank, table_index).  The
    argmax candidate is fixed; theta only decides whether it is returned.
    """
    if thresholds is None:
        thresholds = default_thresholds()
    outcomes = [_query_outcome(c) for c in per_query_candidates]
    points = []
    for theta in thresholds:
        tp = fp = fn = 0
        for outcome in outcomes:
            if outcome is None:
                continue
            best_score, best_label, has_positive = outcome
            if best_score > theta:
                if best_label == 1:
                    tp += 1
                else:
                    fp += 1
            elif has_positive:
                fn += 1
        points.append(_make_point(theta, tp, fp, fn))
    return points


def pr_points_to_rows(points):
    rows = [["threshold", "tp", "fp", "fn", "precision", "recall"]]
    for p in points:
        rows.append([repr(p.threshold), str(p.tp), str(p.fp), str(p.fn),
                     repr(p.precision), repr(p.recall)])
    return rows


def write_pr_csv(points, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in pr_points_to_rows(points):
            fh.write(",".join(row) + "\n")


def write_pr_json(points, path):
    payload = {
        "schema_version": EVAL_SCHEMA_VERSION,
        "points": [
            {
                "threshold": p.threshold,
                "tp": p.tp,
                "fp": p.fp,
                "fn": p.fn,
                "precision": p.precision,
                "recall": p.recall,
                "precision_undefined": p.precision_undefined,
                "recall_undefined": p.recall_undefined,
            }
            for p in points
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
