"""Reproducible synthetic corpora for benchmarking the selection engine.

Real query logs with judged tables are not shippable, so these generators
build small HTML corpora with controlled properties instead.  The central
trick is byte-level control of the fixtures:

* An "overlap pair" serves one query with two documents whose metadata
  and table content are identical; they differ only in how much
  boilerplate surrounds the table.  Word-matching features cannot tell
  them apart, so any model without page-dominance features is forced to
  fall back on document rank and picks the boilerplate-heavy distractor.

* A "dominant off-topic pair" serves one query with two equally dominant,
  structurally identical tables where only the page titles differ (padded
  to equal byte length).  Table-side features tie exactly, so any model
  without query similarity picks the off-topic distractor by rank.

* A "metadata conflict pair" opposes a table whose metadata matches the
  query against one whose cells are stuffed with the query words, which
  separates single-document token bags from split metadata/content bags.

Everything is deterministic from the seed; train/eval corpora stay
disjoint through their query-id ranges.
"""

import json
from pathlib import Path

import numpy as np

__all__ = [
    "generate_ab_training_corpus", "generate_ab_eval_corpus",
    "generate_conflict_corpus",
]

_CONSONANTS = "bcdfglmnprstvz"
_VOWELS = "aeiou"


class _WordGen:
    """Pronounceable pseudo-words, unique per generator instance.

    Uniqueness matters for query topics and entity names (they anchor the
    word-match structure of each fixture) but would exhaust the short-word
    namespace if applied to running text, so sentences reuse a fixed pool.
    """

    POOL_SIZE = 150

    def __init__(self, rng):
        self.rng = rng
        self.used = set()
        self.pool = [self.word(self.rng.integers(2, 4)) for _ in range(self.POOL_SIZE)]

    def word(self, syllables=3):
        while True:
            w = "".join(
                _CONSONANTS[self.rng.integers(len(_CONSONANTS))]
                + _VOWELS[self.rng.integers(len(_VOWELS))]
                for _ in range(int(syllables))
            )
            if w not in self.used:
                self.used.add(w)
                return w

    def sentence(self, n_words):
        picks = self.rng.integers(len(self.pool), size=int(n_words))
        return " ".join(self.pool[i] for i in picks)


def _render_table(column_names, rows, caption=None):
    parts = ["<table>"]
    if caption:
        parts.append(f"<caption>{caption}</caption>")
    parts.append("<thead><tr>" + "".join(f"<th>{c}</th>" for c in column_names)
                 + "</tr></thead><tbody>")
    for row in rows:
        parts.append("<tr>" + "".join(f"<td>{c}</td>" for c in row) + "</tr>")
    parts.append("</tbody></table>")
    return "".join(parts)


def _render_page(title, h1, table_html, fillers_before, fillers_after):
    parts = [f"<html><head><title>{title}</title></head><body><h1>{h1}</h1>"]
    for text in fillers_before:
        parts.append(f"<p>{text}</p>")
    parts.append(table_html)
    for text in fillers_after:
        parts.append(f"<p>{text}</p>")
    parts.append("</body></html>")
    return "".join(parts)


def _equalize(a, b, pad_char="z"):
    """Pad the shorter string with an extra word so byte lengths match."""
    diff = len(a.encode()) - len(b.encode())
    if diff > 0:
        b = b + " " + pad_char * (diff - 1) if diff > 1 else b + pad_char
    elif diff < 0:
        diff = -diff
        a = a + " " + pad_char * (diff - 1) if diff > 1 else a + pad_char
    return a, b


def _entity_rows(words: _WordGen, rng, n_rows):
    """Entity-style grid: name / category / year columns."""
    rows = []
    for _ in range(n_rows):
        rows.append([
            words.word(3).capitalize(),
            words.word(2),
            str(int(rng.integers(1985, 2024))),
        ])
    return rows


def _write_corpus(root, query_records, label_records, pages):
    root = Path(root)
    (root / "docs").mkdir(parents=True, exist_ok=True)
    for path, html in pages:
        (root / path).write_text(html, encoding="utf-8")
    lines = [json.dumps(r, sort_keys=True) for r in query_records]
    (root / "queries.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if label_records is not None:
        lines = [json.dumps(r, sort_keys=True) for r in label_records]
        (root / "labels.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _overlap_pair(words, rng, qid, uid):
    """Family A: same metadata and table, distractor buried in boilerplate.

    Doc 1 (rank 1) is the distractor: strong word match, tiny dominance.
    Doc 2 carries the same table dominating its page.  Labels 0 and 1.
    """
    w1, w2 = words.word(), words.word()
    query = f"{w1} {w2} {uid}"
    title = f"{w1} {w2} {uid} guide and comparison"
    table_html = _render_table(
        ["name", "kind", "since"], _entity_rows(words, rng, int(rng.integers(6, 9))))
    fillers = [words.sentence(18) for _ in range(30)]
    adv = _render_page(title, title, table_html, fillers[:2], fillers[2:])
    good = _render_page(title, title, table_html, fillers[:1], fillers[1:2])
    return {
        "query": {"id": qid, "text": query,
                  "docs": [f"docs/{qid}_d1.html", f"docs/{qid}_d2.html"]},
        "labels": [
            {"query_id": qid, "doc_rank": 1, "table_index": 1, "label": 0},
            {"query_id": qid, "doc_rank": 2, "table_index": 1, "label": 1},
        ],
        "pages": [(f"docs/{qid}_d1.html", adv), (f"docs/{qid}_d2.html", good)],
    }


def _offtopic_pair(words, rng, qid, uid):
    """Family B: equally dominant identical tables, only the titles differ.

    Doc 1 (rank 1) is the distractor: barely on-topic title.  Doc 2's
    title matches the query.  Titles are padded to equal byte length so
    both pages have byte-identical dominance.  Labels 0 and 1.
    """
    w1, w2 = words.word(), words.word()
    query = f"{w1} {w2} {uid}"
    title_good = f"{w1} {w2} {uid} records"
    title_adv = f"{w1} {words.word()} almanac"
    title_good, title_adv = _equalize(title_good, title_adv)
    table_html = _render_table(
        ["name", "kind", "since"], _entity_rows(words, rng, int(rng.integers(6, 9))))
    fillers = [words.sentence(18) for _ in range(2)]
    adv = _render_page(title_adv, title_adv, table_html, fillers[:1], fillers[1:])
    good = _render_page(title_good, title_good, table_html, fillers[:1], fillers[1:])
    return {
        "query": {"id": qid, "text": query,
                  "docs": [f"docs/{qid}_d1.html", f"docs/{qid}_d2.html"]},
        "labels": [
            {"query_id": qid, "doc_rank": 1, "table_index": 1, "label": 0},
            {"query_id": qid, "doc_rank": 2, "table_index": 1, "label": 1},
        ],
        "pages": [(f"docs/{qid}_d1.html", adv), (f"docs/{qid}_d2.html", good)],
    }


def _build_ab(root, makeups, seed):
    rng = np.random.default_rng(seed)
    words = _WordGen(rng)
    queries, labels, pages = [], [], []
    family = {}
    for qid, uid, kind in makeups:
        maker = _overlap_pair if kind == "a" else _offtopic_pair
        made = maker(words, rng, qid, uid)
        queries.append(made["query"])
        labels.extend(made["labels"])
        pages.extend(made["pages"])
        family[qid] = kind
    _write_corpus(root, queries, labels, pages)
    return {
        "root": str(root),
        "family": family,
        "adversarial_key": [1, 1],  # (doc_rank, table_index) of every distractor
        "good_key": [2, 1],
    }


def generate_ab_training_corpus(root, n_queries=30, seed=0):
    """Mixed corpus of both pair families for model training."""
    makeups = [
        (f"tr{i:03d}", f"u{i:03d}t", "a" if i % 2 == 0 else "b")
        for i in range(n_queries)
    ]
    return _build_ab(root, makeups, seed)


def generate_ab_eval_corpus(root, n_family_a=20, n_family_b=20, seed=1):
    """Held-out corpus: family A then family B, disjoint ids from training."""
    makeups = [(f"eva{i:03d}", f"u{i:03d}e", "a") for i in range(n_family_a)]
    makeups += [(f"evb{i:03d}", f"v{i:03d}e", "b") for i in range(n_family_b)]
    return _build_ab(root, makeups, seed)


def _conflict_pair(words, rng, qid, uid):
    """One on-topic table (metadata match) vs one cell-stuffed distractor.

    The distractor's cells repeat the query words with varying intensity
    while its metadata says nothing relevant; the good table's metadata
    matches but its cells are ordinary entities.  Single-bag word scores
    overlap across the two, split bags separate them.
    """
    w1 = words.word()
    query = f"{w1} capitals {uid}"
    good_title = f"{w1} capitals {uid} " + " ".join(
        [f"{w1} capitals {uid}"] * int(rng.integers(0, 3)))
    good_table = _render_table(
        ["name", "region", "population"],
        [[words.word(3).capitalize(), words.word(2), str(int(rng.integers(10000, 999999)))]
         for _ in range(int(rng.integers(5, 9)))])
    bad_title = f"{words.word()} directory pages"
    bad_table = _render_table(
        ["entry", "topic", "count"],
        [[f"{w1} {words.word(2)}", f"capitals {uid}", str(10 + 3 * i)]
         for i in range(int(rng.integers(3, 10)))])
    good_fill = [words.sentence(int(rng.integers(4, 10)))]
    bad_fill = [words.sentence(int(rng.integers(4, 10)))]
    good_page = _render_page(good_title, good_title, good_table, good_fill, [])
    bad_page = _render_page(bad_title, bad_title, bad_table, bad_fill, [])
    good_rank = 1 if int(rng.integers(2)) == 0 else 2
    docs = [None, None]
    docs[good_rank - 1] = (f"docs/{qid}_d{good_rank}.html", good_page)
    bad_rank = 3 - good_rank
    docs[bad_rank - 1] = (f"docs/{qid}_d{bad_rank}.html", bad_page)
    return {
        "query": {"id": qid, "text": query,
                  "docs": [docs[0][0], docs[1][0]]},
        "labels": [
            {"query_id": qid, "doc_rank": good_rank, "table_index": 1, "label": 1},
            {"query_id": qid, "doc_rank": bad_rank, "table_index": 1, "label": 0},
        ],
        "pages": docs,
    }


def generate_conflict_corpus(root, n_queries=30, uid_start=0, seed=0):
    """Metadata/cell conflict corpus; disjoint ranges via uid_start."""
    rng = np.random.default_rng(seed)
    words = _WordGen(rng)
    queries, labels, pages = [], [], []
    for i in range(n_queries):
        idx = uid_start + i
        made = _conflict_pair(words, rng, f"cap{idx:03d}", f"c{idx:03d}")
        queries.append(made["query"])
        labels.extend(made["labels"])
        pages.extend(made["pages"])
    _write_corpus(root, queries, labels, pages)
    return {"root": str(root), "queries": [q["id"] for q in queries]}
