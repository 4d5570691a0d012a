"""Snippet assembly: match promotion, exclusivity, fallback layout."""

import pytest

from helpers import make_table
from tableanswer.snippet import (
    MatchLists, _union, find_matches, generate, load_synonyms,
)


def test_union_respects_limit_and_uniqueness():
    sel = [1, 2]
    _union(sel, 3, 2)
    assert sel == [1, 2]

    sel = [1]
    _union(sel, 3, 2)
    assert sel == [1, 3]

    sel = [1]
    _union(sel, 1, 2)
    assert sel == [1]


def test_round_robin_admission_order():
    # one match per list; with n=2 the subject and other-cell columns fill
    # the column budget before the column-name match gets a turn
    grid = [
        ["alpha", "one", "r0"],
        ["beta", "two", "r1"],
        ["gamma", "three", "r2"],
        ["delta", "four", "ruby"],
        ["eps", "five", "r4"],
        ["paris", "six", "r5"],
    ]
    table = make_table(grid, column_names=["name", "kind", "stone"],
                       subject_col=0)
    query = ["paris", "ruby", "kind"]

    matches = find_matches(query, table)
    assert matches.ec == [((5, 0), 1.0)]
    assert matches.ac == [((3, 2), 1.0)]
    assert matches.cn == [(1, 1.0)]

    snip = generate(table, query, m=2, n=2)
    assert snip.row_indices == [3, 5]
    assert snip.col_indices == [0, 2]
    assert snip.cells == [["delta", "ruby"], ["paris", "r5"]]
    assert snip.column_names == ["name", "stone"]


def test_subject_column_match_outranks_other_cells_for_rows():
    grid = [["a", "x"], ["b", "zz"], ["c", "x2"], ["d", "x3"], ["kiwi", "x4"]]
    table = make_table(grid, subject_col=0)
    snip = generate(table, ["kiwi", "zz"], m=1, n=2)
    assert snip.row_indices == [4]  # subject-column hit, not the (1, 1) hit


def test_subject_column_always_in_snippet():
    grid = [["10", "20", "apple"], ["11", "21", "pear"], ["12", "22", "plum"]]
    table = make_table(grid, subject_col=2)
    snip = generate(table, ["nothing", "matches"], m=2, n=2)
    assert 2 in snip.col_indices
    assert snip.col_indices == [0, 2]
    assert snip.row_indices == [0, 1]


def test_metadata_match_disqualifies_cell():
    # a keyword explained by the page title must not promote body cells
    grid = [["alpha", "u0"], ["beta", "u1"], ["gamma", "u2"],
            ["delta", "u3"], ["salt lake city", "u4"]]
    query = ["salt", "lake", "city"]

    shadowed = make_table(grid, subject_col=0, title="salt lake city utah")
    assert find_matches(query, shadowed).ec == []
    snip = generate(shadowed, query, m=2, n=2)
    assert snip.row_indices == [0, 1]

    plain = make_table(grid, subject_col=0)
    assert find_matches(query, plain).ec == [((4, 0), 1.0)]
    snip = generate(plain, query, m=2, n=2)
    assert snip.row_indices == [0, 4]


def test_header_row_counts_as_metadata_for_cells():
    grid = [["fruit", "3"], ["stone", "4"]]
    covered = make_table(grid, subject_col=0, header_row=["fruit", "weight"])
    assert find_matches(["fruit"], covered).ec == []

    bare = make_table(grid, subject_col=0)
    assert find_matches(["fruit"], bare).ec == [((0, 0), 1.0)]


def test_column_name_match_survives_its_own_metadata():
    # column names are table metadata themselves; exclusivity for them only
    # looks at page-level fields
    grid = [["a", "1"], ["b", "2"]]
    table = make_table(grid, column_names=["city", "pop"], subject_col=0)
    assert find_matches(["city"], table).cn == [(0, 1.0)]

    titled = make_table(grid, column_names=["city", "pop"], subject_col=0,
                        title="city lists")
    assert find_matches(["city"], titled).cn == []


def test_default_layout_top_rows_leftmost_columns():
    grid = [[f"r{r}c{c}" for c in range(3)] for r in range(5)]
    table = make_table(grid, subject_col=None)
    snip = generate(table, ["unrelated"], m=3, n=2)
    assert snip.row_indices == [0, 1, 2]
    assert snip.col_indices == [0, 1]
    assert snip.cells == [["r0c0", "r0c1"], ["r1c0", "r1c1"], ["r2c0", "r2c1"]]


def test_low_coverage_cell_not_matched():
    grid = [["the tall green old oak tree", "x"], ["oak tree", "y"]]
    table = make_table(grid, subject_col=None)
    matches = find_matches(["oak"], table)
    # 1 of 6 tokens misses the coverage bar; 1 of 2 clears it
    assert matches.ac == [((1, 0), 0.5)]


def test_deep_matching_row_joins_top_rows():
    grid = [[f"name{r}", f"v{r}"] for r in range(10)]
    grid[7][0] = "kiwi"
    table = make_table(grid, subject_col=0)
    snip = generate(table, ["kiwi"], m=4, n=2)
    assert snip.row_indices == [0, 1, 2, 7]
    assert snip.col_indices == [0, 1]


def test_synonym_matches_discounted_and_blockable():
    grid = [["auto", "x1"], ["y1", "car"]]
    table = make_table(grid, subject_col=None)
    synonyms = {"car": ["auto"]}
    matches = find_matches(["car"], table, synonyms=synonyms)
    assert matches.ac == [((1, 1), 1.0), ((0, 0), 0.5)]

    # metadata containing the query word blocks the synonym path too
    titled = make_table(grid, subject_col=None, title="car sales")
    blocked = find_matches(["car"], titled, synonyms=synonyms)
    assert blocked.ac == [] and blocked.ec == []


def test_fill_skips_sparse_and_constant_columns():
    grid = []
    for r in range(10):
        sparse = f"s{r}" if r < 4 else ""
        grid.append([sparse, "same", f"val{r}"])
    table = make_table(grid, subject_col=None)
    snip = generate(table, ["unrelated"], m=2, n=1)
    assert snip.col_indices == [2]


def test_snippet_never_exceeds_requested_shape():
    grid = [[f"r{r}c{c}" for c in range(6)] for r in range(9)]
    table = make_table(grid, subject_col=0)
    snip = generate(table, ["r3c4", "r8c1"], m=4, n=4)
    assert len(snip.row_indices) <= 4 and len(snip.col_indices) <= 4
    assert snip.row_indices == sorted(snip.row_indices)
    assert snip.col_indices == sorted(snip.col_indices)
    assert all(len(row) == len(snip.col_indices) for row in snip.cells)


@pytest.mark.parametrize("m,n", [(0, 4), (4, 0), (-1, 2)])
def test_degenerate_dimensions_rejected(m, n):
    table = make_table([["a", "b"], ["c", "d"]])
    with pytest.raises(ValueError):
        generate(table, ["a"], m=m, n=n)


def test_to_json_dict_shape():
    table = make_table([["a", "1"], ["b", "2"]], column_names=["name", "num"],
                       subject_col=0, title="t", h1="head", url="http://e.x/p")
    payload = generate(table, ["a"], m=1, n=2).to_json_dict()
    assert set(payload) == {"rows", "row_indices", "col_indices",
                            "column_names", "title", "h1", "url"}
    assert payload["title"] == "t" and payload["url"] == "http://e.x/p"


def test_load_synonyms_parsing(tmp_path):
    path = tmp_path / "syn.txt"
    path.write_text(
        "# comment line\n"
        "\n"
        "Car: Auto, Automobile\n"
        "no separator here\n"
        "pop: population\n",
        encoding="utf-8",
    )
    assert load_synonyms(path) == {
        "car": ["auto", "automobile"],
        "pop": ["population"],
    }
