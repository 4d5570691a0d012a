"""Word-translation similarity: P(query | document) with EM-trained
translation probabilities.

Training runs expectation-maximization over (query, document) token pairs
in the document-to-query direction, learning P(q | w) for each document
word w.  Scoring mixes the translation channel with a smoothed background
unigram model so that any query is scorable against any document.
"""

import math
from collections import Counter
from dataclasses import dataclass, field

__all__ = ["TranslationTable", "tm_train", "tm_score"]

DEFAULT_BETA = 0.8
DEFAULT_ITERATIONS = 10


@dataclass
class TranslationTable:
    """EM-trained translation probabilities plus the scoring context.

    ``table[w][q]`` is P(q|w); rows sum to 1.  The background unigram is
    counted over the document side of the training corpus and smoothed at
    query time, so it assigns positive probability to unseen words.
    """

    table: dict  # w -> {q: P(q|w)}
    beta: float = DEFAULT_BETA
    bg_count: dict = field(default_factory=dict)  # doc-side token counts
    bg_total: int = 0
    bg_vocab: int = 0
    log_likelihood: list = field(default_factory=list)  # one entry per EM iteration

    def p_background(self, token):
        # add-one smoothing; the extra +1 in the denominator reserves mass
        # for tokens never seen in the corpus
        return (self.bg_count.get(token, 0) + 1) / (self.bg_total + self.bg_vocab + 1)

    def p_translate(self, q, w):
        row = self.table.get(w)
        return row.get(q, 0.0) if row else 0.0

    def to_dict(self):
        return {
            "table": {w: dict(row) for w, row in self.table.items()},
            "beta": self.beta,
            "bg_count": dict(self.bg_count),
            "bg_total": self.bg_total,
            "bg_vocab": self.bg_vocab,
            "log_likelihood": list(self.log_likelihood),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            table={w: {q: float(p) for q, p in row.items()}
                   for w, row in data["table"].items()},
            beta=float(data["beta"]),
            bg_count={k: int(v) for k, v in data["bg_count"].items()},
            bg_total=int(data["bg_total"]),
            bg_vocab=int(data["bg_vocab"]),
            log_likelihood=[float(x) for x in data.get("log_likelihood", [])],
        )


def tm_train(pairs, iterations=DEFAULT_ITERATIONS, beta=DEFAULT_BETA) -> TranslationTable:
    """EM training of P(q|w) over (query tokens, doc tokens) pairs.

    Alignments run document-to-query with no null word.  Probabilities
    start uniform over the query vocabulary; each iteration records the
    training log-likelihood under the parameters it starts from, so the
    history is non-decreasing.
    """
    if not pairs:
        raise ValueError("tm_train requires at least one pair")
    if iterations < 1:
        raise ValueError("tm_train requires iterations >= 1")

    counted = []
    q_vocab = set()
    bg_count = Counter()
    for q_tokens, d_tokens in pairs:
        q_vocab.update(q_tokens)
        bg_count.update(d_tokens)
        if q_tokens and d_tokens:
            counted.append((Counter(q_tokens), Counter(d_tokens), len(d_tokens)))

    uniform = 1.0 / len(q_vocab) if q_vocab else 0.0
    table = {}
    history = []

    def lookup(q, w):
        if not table:
            return uniform  # before the first M-step the table is dense-uniform
        row = table.get(w)
        return row.get(q, 0.0) if row else 0.0

    for _ in range(iterations):
        counts = {}
        ll = 0.0
        for q_count, d_count, d_len in counted:
            for q, qn in q_count.items():
                denom = sum(lookup(q, w) * wn for w, wn in d_count.items())
                if denom <= 0.0:
                    continue
                ll += qn * math.log(denom / d_len)
                for w, wn in d_count.items():
                    inc = qn * lookup(q, w) * wn / denom
                    if inc:
                        row = counts.setdefault(w, {})
                        row[q] = row.get(q, 0.0) + inc
        history.append(ll)
        table = {}
        for w, row in counts.items():
            total = sum(row.values())
            table[w] = {q: c / total for q, c in row.items()}

    return TranslationTable(
        table=table,
        beta=beta,
        bg_count=dict(bg_count),
        bg_total=sum(bg_count.values()),
        bg_vocab=len(bg_count),
        log_likelihood=history,
    )


def tm_score(query_tokens, doc_tokens, table: TranslationTable):
    """Log P(query | doc) under the mixture of translation and background.

    For each query token: (1-beta) * P_bg(q) + beta * sum_w P(q|w) * P(w|doc),
    summed in log space.  An empty document falls back to background only.
    """
    beta = table.beta
    d_count = Counter(doc_tokens)
    d_len = len(doc_tokens)
    score = 0.0
    for q in query_tokens:
        trans = 0.0
        if d_len:
            trans = sum(table.p_translate(q, w) * n for w, n in d_count.items()) / d_len
        p = (1.0 - beta) * table.p_background(q) + beta * trans
        if p <= 0.0:
            # only reachable with beta == 1 and an unseen query word
            return float("-inf")
        score += math.log(p)
    return score
