"""Shared fixtures and independent reference computations for the tests."""

import math
from collections import Counter

import numpy as np

from tableanswer.extraction import (
    DominanceFeatures, ExtractedTable, TableMetadata, detect_subject_column,
)


def reference_bm25(query, doc, docs, k1=1.2, b=0.75):
    """Direct-formula reference, written independently of the module:
    per-query-occurrence sum of idf * tf * (k1+1) / (tf + norm)."""
    n = len(docs)
    if n == 0 or not doc:
        return 0.0
    avgdl = sum(len(d) for d in docs) / n
    if avgdl == 0:
        return 0.0
    tf = Counter(doc)
    score = 0.0
    for q in query:
        df = sum(1 for d in docs if q in d)
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        f = tf[q]
        score += idf * (f * (k1 + 1.0)) / (f + k1 * (1.0 - b + b * len(doc) / avgdl))
    return score


def make_table(grid, column_names=None, subject_col="auto", doc_rank=1,
               table_index=1, url="", title="", h1="", headings=(),
               caption="", header_row=None, footer_row=None, dominance=None):
    """Build an ExtractedTable directly, bypassing HTML parsing."""
    meta = TableMetadata(
        url=url, page_title=title, h1_heading=h1,
        section_headings=list(headings), caption=caption,
        header_row=header_row if header_row is not None else column_names,
        footer_row=footer_row,
        column_names=column_names,
    )
    if subject_col == "auto":
        subject_col = detect_subject_column(grid, column_names)
    return ExtractedTable(
        grid=grid, metadata=meta, subject_col=subject_col,
        doc_rank=doc_rank, table_index=table_index,
        dominance=dominance if dominance is not None else DominanceFeatures(),
    )


def tie_averaged_auc(scores, labels):
    """Rank-sum AUC with average ranks on ties.

    Tree-model scores repeat across rows, so plain sort-position AUC would
    depend on row order; average ranks make it order-free.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=float)
    ordered = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j < len(ordered) and ordered[j] == ordered[i]:
            j += 1
        ranks[order[i:j]] = (i + j + 1) / 2.0  # mean of 1-based positions
        i = j
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes")
    return (ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


def random_token_docs(rng, n_docs, vocab_size=30, max_len=12):
    """Small random token documents over a closed pseudo-vocabulary."""
    vocab = [f"w{i}" for i in range(vocab_size)]
    docs = []
    for _ in range(n_docs):
        length = int(rng.integers(1, max_len + 1))
        docs.append([vocab[int(k)] for k in rng.integers(0, vocab_size, size=length)])
    return docs
