"""Okapi BM25 scoring over token documents.

Corpus statistics (document count, document frequencies, average length)
are collected once per document kind and reused for every query, so
scoring a candidate never needs the rest of the corpus in memory.
"""

import math
from collections import Counter
from dataclasses import dataclass, field

__all__ = ["CorpusStats", "corpus_stats", "bm25"]

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75


@dataclass
class CorpusStats:
    """Sufficient statistics of a token-document corpus."""

    n_docs: int = 0
    total_len: int = 0
    df: dict = field(default_factory=dict)  # token -> number of docs containing it

    @property
    def avgdl(self):
        return self.total_len / self.n_docs if self.n_docs else 0.0

    def add(self, doc_tokens):
        self.n_docs += 1
        self.total_len += len(doc_tokens)
        for token in set(doc_tokens):
            self.df[token] = self.df.get(token, 0) + 1

    def idf(self, token):
        df = self.df.get(token, 0)
        return math.log(1.0 + (self.n_docs - df + 0.5) / (df + 0.5))

    def to_dict(self):
        return {"n_docs": self.n_docs, "total_len": self.total_len, "df": dict(self.df)}

    @classmethod
    def from_dict(cls, data):
        return cls(n_docs=int(data["n_docs"]), total_len=int(data["total_len"]),
                   df={str(k): int(v) for k, v in data["df"].items()})


def corpus_stats(docs) -> CorpusStats:
    """Collect stats over an iterable of token lists."""
    stats = CorpusStats()
    for doc in docs:
        stats.add(doc)
    return stats


def bm25(query_tokens, doc_tokens, stats: CorpusStats, k1=DEFAULT_K1, b=DEFAULT_B):
    """BM25 score of a document for a query.

    Summed over query token occurrences, so a token repeated in the query
    contributes once per occurrence.  An empty corpus scores 0.
    """
    if stats.n_docs == 0 or stats.avgdl == 0.0:
        return 0.0
    dl = len(doc_tokens)
    tf = Counter(doc_tokens)
    norm = k1 * (1.0 - b + b * dl / stats.avgdl)
    score = 0.0
    for token in query_tokens:
        f = tf.get(token, 0)
        if f == 0:
            continue
        score += stats.idf(token) * f * (k1 + 1.0) / (f + norm)
    return score
