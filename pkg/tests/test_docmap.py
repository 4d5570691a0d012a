"""Table-to-token-document mapping under the four strategies."""

import pytest

from helpers import make_table
from tableanswer.docmap import (
    ALL_DOC_KINDS, DocumentSet, Strategy, build_documents, numeric_columns,
    tokenize, url_tokens,
)

GRID = [["Austin", "Texas", "950"], ["Boston", "Mass", "675"]]
NAMES = ["City", "State", "Pop"]


def city_table(**kw):
    return make_table(GRID, column_names=NAMES, url="http://ex.org/us/cities",
                      title="US Cities", h1="Cities", caption="By population", **kw)


def test_tokenize_lowercases_and_splits():
    assert tokenize("San Jose, CA") == ["san", "jose", "ca"]
    assert tokenize("A_B-C d1") == ["a", "b", "c", "d1"]
    assert tokenize("") == []
    assert tokenize("2024!") == ["2024"]


def test_url_tokens_host_then_path_no_query():
    assert url_tokens("https://en.example.org/wiki/List_states?q=1#frag") == [
        "en", "example", "org", "wiki", "list", "states"]
    assert url_tokens("docs/q1_d2.html") == ["docs", "q1", "d2", "html"]
    assert url_tokens("") == []


def test_strategy_parse_aliases():
    assert Strategy.parse("single") is Strategy.SINGLE
    assert Strategy.parse("MDoc+CDoc") is Strategy.MDOC_CDOC
    assert Strategy.parse("mdoc-sdoc") is Strategy.MDOC_SDOC
    assert Strategy.parse(Strategy.MDOC_CDOC_SDOC) is Strategy.MDOC_CDOC_SDOC
    with pytest.raises(ValueError):
        Strategy.parse("nope")


def test_strategy_doc_kinds():
    assert Strategy.SINGLE.doc_kinds == ("doc",)
    assert Strategy.MDOC_CDOC.doc_kinds == ("mdoc", "cdoc")
    assert Strategy.MDOC_SDOC.doc_kinds == ("mdoc", "sdoc")
    assert Strategy.MDOC_CDOC_SDOC.doc_kinds == ("mdoc", "cdoc", "sdoc")
    assert set(ALL_DOC_KINDS) >= {k for s in Strategy for k in s.doc_kinds}


def test_numeric_columns_skips_number_column():
    assert numeric_columns(city_table()) == {2}


def test_mdoc_token_order():
    docs = build_documents(city_table(), Strategy.MDOC_CDOC_SDOC)
    # url host+path, title, h1, headings, caption, header row, column names
    assert docs.docs["mdoc"] == [
        "ex", "org", "us", "cities",
        "us", "cities", "cities", "by", "population",
        "city", "state", "pop",
        "city", "state", "pop",
    ]


def test_cdoc_row_major_skipping_numeric():
    docs = build_documents(city_table(), Strategy.MDOC_CDOC)
    assert docs.docs["cdoc"] == ["austin", "texas", "boston", "mass"]


def test_sdoc_is_subject_name_plus_cells():
    table = city_table()
    assert table.subject_col == 0
    docs = build_documents(table, Strategy.MDOC_SDOC)
    assert docs.docs["sdoc"] == ["city", "austin", "boston"]


def test_sdoc_empty_without_subject_column():
    table = make_table([["1", "2"], ["3", "4"]], subject_col=None)
    docs = build_documents(table, Strategy.MDOC_CDOC_SDOC)
    assert docs.docs["sdoc"] == []


def test_single_doc_is_mdoc_then_cdoc():
    table = city_table()
    split = build_documents(table, Strategy.MDOC_CDOC)
    single = build_documents(table, Strategy.SINGLE)
    assert single.docs["doc"] == split.docs["mdoc"] + split.docs["cdoc"]


def test_document_set_iterates_in_strategy_order():
    docs = build_documents(city_table(), "mdoc_cdoc_sdoc")
    assert [kind for kind, _ in docs] == ["mdoc", "cdoc", "sdoc"]
    assert isinstance(docs, DocumentSet)


def test_footer_row_included_in_mdoc():
    table = make_table(GRID, column_names=NAMES, footer_row=["Total", "", "1625"])
    docs = build_documents(table, Strategy.MDOC_CDOC)
    assert "total" in docs.docs["mdoc"]
    assert "1625" in docs.docs["mdoc"]
