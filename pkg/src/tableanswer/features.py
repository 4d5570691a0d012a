"""Per-(query, table) feature vector assembly.

The classifier consumes one flat named vector per candidate table: a
similarity feature for every enabled model against every document the
mapping strategy produces, then the enabled table-side feature groups
(page-dominance fractions, page-position features, quality features).
Feature order is a pure function of the configuration, so two datasets
built with the same config are column-compatible.
"""

from dataclasses import dataclass

import numpy as np

from . import bm25 as bm25_mod
from .cdssm import CdssmParams, cdssm_similarity
from .docmap import DocumentSet, Strategy, build_documents
from .extraction import ExtractedTable
from .quality import compute_quality
from .translation import TranslationTable, tm_score

__all__ = [
    "FeatureConfig", "FeatureVector", "SimilarityModels",
    "assemble", "build_corpus_stats",
]

SIM_ORDER = ("bm25", "tm", "cdssm")
GROUP_ORDER = ("fraction", "position", "quality")

_GROUP_FIELDS = {
    "fraction": ("frac_raw", "frac_cleaned", "frac_main"),
    "position": ("pos_raw", "pos_cleaned", "pos_main", "table_index"),
    "quality": (
        "n_rows", "n_cols", "empty_cell_fraction", "has_column_names",
        "has_numeric_column", "numeric_column_count",
        "subject_distinct_fraction", "type_consistency_mean",
        "type_consistency_min",
    ),
}


@dataclass(frozen=True)
class FeatureConfig:
    """Which features to emit, in a canonical order."""

    strategy: Strategy = Strategy.MDOC_CDOC_SDOC
    similarities: tuple = SIM_ORDER
    groups: tuple = GROUP_ORDER

    def __post_init__(self):
        strategy = Strategy.parse(self.strategy)
        sims = tuple(s for s in SIM_ORDER if s in set(self.similarities))
        groups = tuple(g for g in GROUP_ORDER if g in set(self.groups))
        unknown = set(self.similarities) - set(SIM_ORDER)
        if unknown:
            raise ValueError(f"unknown similarity models: {sorted(unknown)}")
        unknown = set(self.groups) - set(GROUP_ORDER)
        if unknown:
            raise ValueError(f"unknown feature groups: {sorted(unknown)}")
        if not sims and not groups:
            raise ValueError("feature config enables no similarity model and no feature group")
        object.__setattr__(self, "strategy", strategy)
        object.__setattr__(self, "similarities", sims)
        object.__setattr__(self, "groups", groups)

    def feature_names(self):
        names = []
        for kind in self.strategy.doc_kinds:
            for sim in self.similarities:
                names.append(f"{sim}_{kind}")
        for group in self.groups:
            names.extend(_GROUP_FIELDS[group])
        return names

    def to_dict(self):
        return {
            "strategy": self.strategy.value,
            "similarities": list(self.similarities),
            "groups": list(self.groups),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            strategy=Strategy.parse(data["strategy"]),
            similarities=tuple(data["similarities"]),
            groups=tuple(data["groups"]),
        )


@dataclass
class SimilarityModels:
    """Trained models needed by the enabled similarities (BM25 needs only
    corpus statistics, supplied separately)."""

    tm: TranslationTable = None
    cdssm: CdssmParams = None


@dataclass
class FeatureVector:
    names: tuple
    values: np.ndarray
    key: tuple = ("", 0, 0)  # (query_id, doc_rank, table_index)

    def as_dict(self):
        return dict(zip(self.names, (float(v) for v in self.values)))


def build_corpus_stats(tables, strategy) -> dict:
    """Per-document-kind BM25 statistics over a collection of tables.

    All documents of one kind across the collection form one corpus.
    """
    strategy = Strategy.parse(strategy)
    stats = {kind: bm25_mod.CorpusStats() for kind in strategy.doc_kinds}
    for table in tables:
        for kind, doc in build_documents(table, strategy):
            stats[kind].add(doc)
    return stats


def _similarity_value(sim, query_tokens, doc, kind, models, stats):
    if sim == "bm25":
        if stats is None or kind not in stats:
            raise ValueError(f"bm25 enabled but no corpus stats for document kind {kind!r}")
        return bm25_mod.bm25(query_tokens, doc, stats[kind])
    if sim == "tm":
        if models is None or models.tm is None:
            raise ValueError("tm enabled but no translation table supplied")
        return tm_score(query_tokens, doc, models.tm)
    if sim == "cdssm":
        if models is None or models.cdssm is None:
            raise ValueError("cdssm enabled but no cdssm parameters supplied")
        return cdssm_similarity(query_tokens, doc, models.cdssm)
    raise ValueError(f"unknown similarity model {sim!r}")


def assemble(query_tokens, table: ExtractedTable, models: SimilarityModels,
             stats: dict, cfg: FeatureConfig, query_id="") -> FeatureVector:
    """Build the feature vector of one candidate table for one query."""
    doc_set: DocumentSet = build_documents(table, cfg.strategy)
    values = []
    for kind, doc in doc_set:
        for sim in cfg.similarities:
            values.append(_similarity_value(sim, query_tokens, doc, kind, models, stats))

    dom = table.dominance
    quality = compute_quality(table) if "quality" in cfg.groups else None
    group_values = {
        "frac_raw": lambda: dom.frac_raw,
        "frac_cleaned": lambda: dom.frac_cleaned,
        "frac_main": lambda: dom.frac_main,
        "pos_raw": lambda: dom.pos_raw,
        "pos_cleaned": lambda: dom.pos_cleaned,
        "pos_main": lambda: dom.pos_main,
        "table_index": lambda: float(table.table_index),
        "n_rows": lambda: float(quality.n_rows),
        "n_cols": lambda: float(quality.n_cols),
        "empty_cell_fraction": lambda: quality.empty_cell_fraction,
        "has_column_names": lambda: float(quality.has_column_names),
        "has_numeric_column": lambda: float(quality.has_numeric_column),
        "numeric_column_count": lambda: float(quality.numeric_column_count),
        "subject_distinct_fraction": lambda: quality.subject_distinct_fraction,
        "type_consistency_mean": lambda: quality.type_consistency_mean,
        "type_consistency_min": lambda: quality.type_consistency_min,
    }
    for group in cfg.groups:
        for name in _GROUP_FIELDS[group]:
            values.append(float(group_values[name]()))

    arr = np.array(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        bad = [n for n, v in zip(cfg.feature_names(), arr) if not np.isfinite(v)]
        raise ValueError(f"non-finite feature values for {bad}")
    return FeatureVector(
        names=tuple(cfg.feature_names()),
        values=arr,
        key=(query_id, table.doc_rank, table.table_index),
    )
