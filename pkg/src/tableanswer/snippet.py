"""Building the m-by-n preview of a chosen table.

Rows and columns that match query keywords are promoted into the snippet;
remaining slots fall back to the top rows and leftmost useful columns.  A
keyword only counts inside a cell when it is exclusive to the table body:
if the word also appears in the page or table metadata, matching cells
are not evidence of anything (the metadata match already explains the
query) and must not displace the default layout.
"""

from collections import deque
from dataclasses import dataclass, field

from .docmap import tokenize, url_tokens
from .extraction import ExtractedTable, distinct_fraction

__all__ = ["Snippet", "MatchLists", "find_matches", "generate", "load_synonyms"]

DEFAULT_M = 4
DEFAULT_N = 4
COVERAGE_THRESHOLD = 0.5
SYNONYM_DISCOUNT = 0.5
FILL_MAX_EMPTY = 0.5
FILL_MIN_DISTINCT = 0.2


@dataclass
class MatchLists:
    """Query matches partitioned by where they occur, best first.

    ec: subject-column cells and ac: other data cells hold entries of
    ((row, col), desirability); cn: column names holds (col, desirability).
    """

    ec: list = field(default_factory=list)
    ac: list = field(default_factory=list)
    cn: list = field(default_factory=list)


@dataclass
class Snippet:
    row_indices: list
    col_indices: list
    cells: list  # text matrix, len(row_indices) x len(col_indices)
    column_names: list
    title: str
    h1: str
    url: str

    def to_json_dict(self):
        return {
            "rows": self.cells,
            "row_indices": list(self.row_indices),
            "col_indices": list(self.col_indices),
            "column_names": list(self.column_names),
            "title": self.title,
            "h1": self.h1,
            "url": self.url,
        }


def load_synonyms(path):
    """Parse a 'token: syn1, syn2' per-line synonym file."""
    synonyms = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or ":" not in line:
                continue
            token, _, rest = line.partition(":")
            values = [s.strip().lower() for s in rest.split(",") if s.strip()]
            if token.strip():
                synonyms[token.strip().lower()] = values
    return synonyms


def _metadata_token_sets(table: ExtractedTable):
    """(full metadata token set, metadata-without-column-text token set).

    The second set drives exclusivity for column-name matches; a column
    name must not disqualify itself just by being table metadata.
    """
    meta = table.metadata
    page_tokens = set(url_tokens(meta.url))
    page_tokens.update(tokenize(meta.page_title))
    page_tokens.update(tokenize(meta.h1_heading))
    for heading in meta.section_headings:
        page_tokens.update(tokenize(heading))
    page_tokens.update(tokenize(meta.caption))

    full = set(page_tokens)
    for row in (meta.header_row, meta.footer_row):
        if row:
            for cell in row:
                full.update(tokenize(cell))
    if meta.column_names:
        for name in meta.column_names:
            full.update(tokenize(name))
    return full, page_tokens


def _match_cell(tokens, query_set, syn_to_query, excluded):
    """(exact occurrences, synonym occurrences) of exclusive matches."""
    exact = syn = 0
    for t in tokens:
        if t in query_set:
            if t not in excluded:
                exact += 1
        elif t in syn_to_query:
            if t not in excluded and syn_to_query[t] not in excluded:
                syn += 1
    return exact, syn


def find_matches(query_tokens, table: ExtractedTable, synonyms=None) -> MatchLists:
    """Locate exclusive keyword matches in cells and column names.

    A data cell qualifies only when matched tokens (exact plus synonym)
    cover at least half of its tokens; desirability discounts synonym
    matches by half.  Column names need a match but no coverage.
    """
    synonyms = synonyms or {}
    query_set = set(query_tokens)
    syn_to_query = {}
    for q in query_set:
        for s in synonyms.get(q, ()):
            syn_to_query.setdefault(s, q)

    full_meta, page_meta = _metadata_token_sets(table)
    lists = MatchLists()

    for r, row in enumerate(table.grid):
        for c, cell in enumerate(row):
            tokens = tokenize(cell)
            if not tokens:
                continue
            exact, syn = _match_cell(tokens, query_set, syn_to_query, full_meta)
            if exact + syn == 0:
                continue
            if (exact + syn) / len(tokens) < COVERAGE_THRESHOLD:
                continue
            desirability = (exact + SYNONYM_DISCOUNT * syn) / len(tokens)
            entry = ((r, c), desirability)
            if table.subject_col is not None and c == table.subject_col:
                lists.ec.append(entry)
            else:
                lists.ac.append(entry)

    if table.metadata.column_names:
        for c, name in enumerate(table.metadata.column_names):
            tokens = tokenize(name)
            if not tokens:
                continue
            exact, syn = _match_cell(tokens, query_set, syn_to_query, page_meta)
            if exact + syn == 0:
                continue
            lists.cn.append((c, (exact + SYNONYM_DISCOUNT * syn) / len(tokens)))

    lists.ec.sort(key=lambda e: (-e[1], e[0]))
    lists.ac.sort(key=lambda e: (-e[1], e[0]))
    lists.cn.sort(key=lambda e: (-e[1], e[0]))
    return lists


def _union(selected, value, limit):
    """Append value if absent and the list still has room; else no-op."""
    if value not in selected and len(selected) < limit:
        selected.append(value)


def _fill_columns(table: ExtractedTable, selected, n):
    """Leftmost columns that are not mostly empty or mostly repeats."""
    for c in range(table.n_cols):
        if len(selected) >= n:
            break
        if c in selected:
            continue
        column = [row[c] for row in table.grid]
        empty = sum(1 for v in column if not v.strip()) / len(column) if column else 1.0
        if empty > FILL_MAX_EMPTY:
            continue
        if distinct_fraction(column) < FILL_MIN_DISTINCT:
            continue
        selected.append(c)


def generate(table: ExtractedTable, query_tokens, m=DEFAULT_M, n=DEFAULT_N,
             synonyms=None) -> Snippet:
    """Choose up to m rows and n columns for display.

    Match-bearing rows/columns are admitted first, round-robin across the
    subject-column, other-cell and column-name match lists; then top rows
    and leftmost useful columns fill what remains.  The subject column is
    always kept.
    """
    if m < 1 or n < 1:
        raise ValueError("snippet dimensions must be at least 1 by 1")
    matches = find_matches(query_tokens, table, synonyms)
    rows = []
    cols = []
    if table.subject_col is not None:
        _union(cols, table.subject_col, n)

    queues = [deque(matches.ec), deque(matches.ac), deque(matches.cn)]
    while any(queues) and (len(rows) < m or len(cols) < n):
        for i, queue in enumerate(queues):
            if not queue:
                continue
            ref, _ = queue.popleft()
            if i < 2:  # cell reference
                r, c = ref
                _union(rows, r, m)
                _union(cols, c, n)
            else:  # column-name reference
                _union(cols, ref, n)

    for r in range(table.n_rows):
        if len(rows) >= m:
            break
        if r not in rows:
            rows.append(r)
    _fill_columns(table, cols, n)

    rows.sort()
    cols.sort()
    names = table.metadata.column_names
    return Snippet(
        row_indices=rows,
        col_indices=cols,
        cells=[[table.grid[r][c] for c in cols] for r in rows],
        column_names=[names[c] for c in cols] if names else [],
        title=table.metadata.page_title,
        h1=table.metadata.h1_heading,
        url=table.metadata.url,
    )
