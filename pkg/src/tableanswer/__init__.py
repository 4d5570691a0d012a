"""Table-answer selection for web search queries.

Given a query and the HTML documents a search engine returned for it, the
package extracts candidate relational tables, scores how well each table
answers the query, and either selects one table (with an m x n snippet of
its most relevant rows and columns) or abstains.

The stages are exposed as submodules:

``dom`` / ``extraction``
    Offset-preserving HTML parsing, relational-table detection, metadata
    and page-dominance measurement.
``docmap``
    Mapping a table to token documents (metadata, cells, subject column)
    under the configurable splitting strategies.
``bm25`` / ``translation`` / ``cdssm``
    The three query-document similarity models, including training for
    the word-translation and convolutional semantic models.
``quality`` / ``features``
    Table quality measures and assembly of per-candidate feature vectors.
``classifier`` / ``selector``
    Gradient-boosted scoring of candidates and thresholded selection.
``snippet``
    Keyword-driven row/column selection for display.
``evaluation``
    Precision/recall curves for the classifier and the end-to-end selector.
``pipeline`` / ``cli``
    Corpus ingestion, model bundles, and the command-line entry points.
``synth``
    Deterministic synthetic corpora for benchmarking.
"""

from . import (
    bm25, cdssm, classifier, docmap, dom, evaluation, extraction,
    features, pipeline, quality, selector, snippet, synth, translation,
)
from .bm25 import CorpusStats
from .cdssm import CdssmParams
from .classifier import BoostedModel, LabeledPair
from .docmap import DocumentSet, Strategy, build_documents, tokenize
from .dom import parse_html
from .extraction import ExtractedTable, extract_candidate_tables
from .features import FeatureConfig, FeatureVector, SimilarityModels
from .pipeline import Corpus, ModelBundle, PipelineError, ingest_corpus
from .quality import QualityFeatures
from .selector import SelectionResult
from .snippet import Snippet
from .translation import TranslationTable

__version__ = "0.1.0"

__all__ = [
    "bm25", "cdssm", "classifier", "docmap", "dom", "evaluation",
    "extraction", "features", "pipeline", "quality", "selector", "snippet",
    "synth", "translation",
    "BoostedModel", "CdssmParams", "Corpus", "CorpusStats", "DocumentSet",
    "ExtractedTable", "FeatureConfig", "FeatureVector", "LabeledPair",
    "ModelBundle", "PipelineError", "QualityFeatures", "SelectionResult",
    "SimilarityModels", "Snippet", "Strategy", "TranslationTable",
    "build_documents", "extract_candidate_tables", "ingest_corpus",
    "parse_html", "tokenize",
    "__version__",
]
