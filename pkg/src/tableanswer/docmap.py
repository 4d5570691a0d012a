"""Mapping a table to token documents for similarity scoring.

A table can be flattened into a single bag of tokens, or split so that
matches against its metadata, its cell content and its subject column can
be told apart.  Cell content skips numeric columns wholesale, since search
queries rarely contain the numbers themselves.
"""

import re
from dataclasses import dataclass
from enum import Enum
from urllib.parse import urlsplit

from .extraction import ExtractedTable, is_numeric_column

__all__ = ["Strategy", "DocumentSet", "tokenize", "url_tokens", "build_documents"]

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class Strategy(str, Enum):
    """Which token documents to build for a table."""

    SINGLE = "single"
    MDOC_CDOC = "mdoc_cdoc"
    MDOC_SDOC = "mdoc_sdoc"
    MDOC_CDOC_SDOC = "mdoc_cdoc_sdoc"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("+", "_").replace("-", "_")
        aliases = {
            "single": cls.SINGLE, "doc": cls.SINGLE,
            "mdoc_cdoc": cls.MDOC_CDOC, "mdoccdoc": cls.MDOC_CDOC,
            "mdoc_sdoc": cls.MDOC_SDOC, "mdocsdoc": cls.MDOC_SDOC,
            "mdoc_cdoc_sdoc": cls.MDOC_CDOC_SDOC, "mdoccdocsdoc": cls.MDOC_CDOC_SDOC,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown document mapping strategy: {value!r}") from None

    @property
    def doc_kinds(self):
        return _STRATEGY_KINDS[self]


_STRATEGY_KINDS = {
    Strategy.SINGLE: ("doc",),
    Strategy.MDOC_CDOC: ("mdoc", "cdoc"),
    Strategy.MDOC_SDOC: ("mdoc", "sdoc"),
    Strategy.MDOC_CDOC_SDOC: ("mdoc", "cdoc", "sdoc"),
}

ALL_DOC_KINDS = ("doc", "mdoc", "cdoc", "sdoc")


@dataclass
class DocumentSet:
    """Named token documents for one table under one strategy."""

    strategy: Strategy
    docs: dict  # kind -> list of tokens, in strategy order

    def __iter__(self):
        return iter(self.docs.items())


def tokenize(text):
    """Lowercase tokens split on any non-alphanumeric boundary.

    'San Jose, CA' -> ['san', 'jose', 'ca'];  numbers stay as tokens.
    """
    return _TOKEN_RE.findall(text.lower())


def url_tokens(url):
    """Host tokens (split on dots) then path tokens; the query string and
    fragment are dropped."""
    parts = urlsplit(url)
    return tokenize(parts.netloc) + tokenize(parts.path)


def _metadata_tokens(table: ExtractedTable):
    meta = table.metadata
    tokens = url_tokens(meta.url)
    tokens += tokenize(meta.page_title)
    tokens += tokenize(meta.h1_heading)
    for heading in meta.section_headings:
        tokens += tokenize(heading)
    tokens += tokenize(meta.caption)
    for row in (meta.header_row, meta.footer_row):
        if row:
            for cell in row:
                tokens += tokenize(cell)
    if meta.column_names:
        for name in meta.column_names:
            tokens += tokenize(name)
    return tokens


def numeric_columns(table: ExtractedTable):
    """Indices of grid columns that hold mostly numbers."""
    if not table.grid:
        return set()
    return {
        j for j in range(table.n_cols)
        if is_numeric_column([row[j] for row in table.grid])
    }


def _cell_tokens(table: ExtractedTable):
    skip = numeric_columns(table)
    tokens = []
    for row in table.grid:
        for j, cell in enumerate(row):
            if j in skip:
                continue
            tokens += tokenize(cell)
    return tokens


def _subject_tokens(table: ExtractedTable):
    j = table.subject_col
    if j is None:
        return []
    tokens = []
    if table.metadata.column_names:
        tokens += tokenize(table.metadata.column_names[j])
    for row in table.grid:
        tokens += tokenize(row[j])
    return tokens


def build_documents(table: ExtractedTable, strategy) -> DocumentSet:
    """Build the token documents a strategy asks for.

    The metadata document concatenates url, page title, h1, section
    headings, caption, header/footer rows and column names, in that order.
    The cell document walks the grid row by row, left to right, skipping
    numeric columns.  The subject document is the subject column's name
    followed by its cells (empty when the table has no subject column).
    The single-document form is metadata tokens followed by cell tokens.
    """
    strategy = Strategy.parse(strategy)
    builders = {
        "mdoc": _metadata_tokens,
        "cdoc": _cell_tokens,
        "sdoc": _subject_tokens,
    }
    docs = {}
    for kind in strategy.doc_kinds:
        if kind == "doc":
            docs[kind] = _metadata_tokens(table) + _cell_tokens(table)
        else:
            docs[kind] = builders[kind](table)
    return DocumentSet(strategy=strategy, docs=docs)
