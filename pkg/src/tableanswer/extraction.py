"""Relational table extraction from parsed HTML documents.

Finds data tables in a page, expands row/column spans into a rectangular
cell grid, pulls the surrounding context (title, headings, caption, text
before the table) into metadata, locates the subject column (the one naming
the table's entities), and measures how strongly the table dominates the
page it came from.
"""

import statistics
from dataclasses import dataclass, field

from .dom import DomTree, DomNode, parse_html

__all__ = [
    "TableMetadata", "DominanceFeatures", "ExtractedTable",
    "parse_html", "extract_candidate_tables", "is_relational",
    "extract_metadata", "detect_subject_column", "compute_dominance",
    "is_numeric_cell", "is_numeric_column", "distinct_fraction",
]

MAX_PRECEDING_TEXT = 500
MAX_SPAN = 1000

_CURRENCY_CHARS = "$€£¥₹"
_PRECEDING_BLOCK_TAGS = frozenset({
    "p", "div", "ul", "ol", "dl", "blockquote", "pre", "section",
    "article", "aside", "main", "figure", "form", "address",
})


@dataclass
class TableMetadata:
    """Context captured around one table; absent fields stay empty."""

    url: str = ""
    page_title: str = ""
    h1_heading: str = ""
    section_headings: list = field(default_factory=list)
    preceding_text: str = ""
    caption: str = ""
    header_row: list = None
    footer_row: list = None
    column_names: list = None


@dataclass
class DominanceFeatures:
    """Query-independent size/position features of a table in its page.

    Fractions and positions are byte ratios in [0, 1], measured three ways:
    on the raw source, on the source with script/style/comments removed
    ("cleaned"), and within the main content container.
    """

    frac_raw: float = 0.0
    frac_cleaned: float = 0.0
    frac_main: float = 0.0
    pos_raw: float = 0.0
    pos_cleaned: float = 0.0
    pos_main: float = 0.0
    table_index: int = 1


@dataclass
class ExtractedTable:
    """One relational table: rectangular grid plus provenance and features."""

    grid: list
    metadata: TableMetadata
    subject_col: int | None
    doc_rank: int
    table_index: int
    dominance: DominanceFeatures

    @property
    def n_rows(self):
        return len(self.grid)

    @property
    def n_cols(self):
        return len(self.grid[0]) if self.grid else 0


def _norm(text):
    return " ".join(text.split())


def is_numeric_cell(text):
    """True if the cell reads as a number once commas, currency symbols and
    a trailing percent sign are stripped."""
    s = text.strip().replace(",", "")
    for ch in _CURRENCY_CHARS:
        s = s.replace(ch, "")
    s = s.strip()
    if s.endswith("%"):
        s = s[:-1].strip()
    if not s or not any(c.isdigit() for c in s):
        return False
    try:
        float(s)
        return True
    except ValueError:
        return False


def is_numeric_column(cells):
    """A column is numeric when at least 80% of its non-empty cells are."""
    non_empty = [c for c in cells if c.strip()]
    if not non_empty:
        return False
    numeric = sum(1 for c in non_empty if is_numeric_cell(c))
    return numeric / len(non_empty) >= 0.8


def distinct_fraction(cells):
    if not cells:
        return 0.0
    return len(set(cells)) / len(cells)


def _int_attr(attrs, name, default=1):
    try:
        value = int(str(attrs.get(name, default)).strip())
    except (TypeError, ValueError):
        return default
    return min(max(value, 1), MAX_SPAN)


def _nearest_table(node):
    for anc in node.ancestors():
        if anc.tag == "table":
            return anc
    return None


def _section_of(row, table_node):
    """'thead', 'tfoot' or 'body' for a tr directly belonging to table_node."""
    node = row.parent
    while node is not None and node is not table_node:
        if node.tag in ("thead", "tfoot"):
            return node.tag
        node = node.parent
    return "body"


def _table_rows(table_node):
    head, body, foot = [], [], []
    for node in table_node.iter():
        if node.tag != "tr" or _nearest_table(node) is not table_node:
            continue
        {"thead": head, "tfoot": foot, "body": body}[_section_of(node, table_node)].append(node)
    return head, body, foot


def _row_cells(row):
    cells = []
    for child in row.children:
        if child.tag in ("td", "th"):
            cells.append((
                _norm(child.text_content()),
                _int_attr(child.attrs, "rowspan"),
                _int_attr(child.attrs, "colspan"),
            ))
    return cells


def _expand_rows(rows):
    """Expand rowspan/colspan into duplicated cells; pad ragged rows."""
    out = []
    pending = {}  # column -> [rows_remaining, text]
    for row in rows:
        cells = []

        def take_pending():
            col = len(cells)
            while col in pending:
                entry = pending[col]
                cells.append(entry[1])
                entry[0] -= 1
                if entry[0] == 0:
                    del pending[col]
                col += 1

        take_pending()
        for text, rowspan, colspan in _row_cells(row):
            for _ in range(colspan):
                col = len(cells)
                cells.append(text)
                if rowspan > 1:
                    pending[col] = [rowspan - 1, text]
                take_pending()
        # spans further right than this row's own cells
        for col in sorted(c for c in pending if c >= len(cells)):
            while len(cells) < col:
                cells.append("")
            take_pending()
        out.append(cells)
    width = max((len(r) for r in out), default=0)
    for row in out:
        row.extend([""] * (width - len(row)))
    return out


def _first_header_candidate(head_rows, body_rows):
    """Header rows are the thead rows, or a leading all-th body row."""
    if head_rows:
        return head_rows, body_rows
    if body_rows:
        first = body_rows[0]
        cells = [c for c in first.children if c.tag in ("td", "th")]
        if cells and all(c.tag == "th" for c in cells):
            return [first], body_rows[1:]
    return [], body_rows


def _build_grid(table_node):
    """Returns (data_grid, header_row, footer_row), spans expanded."""
    head_rows, body_rows, foot_rows = _table_rows(table_node)
    head_rows, data_rows = _first_header_candidate(head_rows, body_rows)
    grid = _expand_rows(data_rows)
    header = _expand_rows(head_rows)[0] if head_rows else None
    footer = _expand_rows(foot_rows)[0] if foot_rows else None
    return grid, header, footer


def is_relational(grid, node_context=None):
    """Heuristic filter for data tables.

    Requires, in order: at least a 2x2 grid after span expansion; no nested
    table element; at most half the cells empty; median cell length at most
    100 characters; no role="presentation" marker; and at least two columns
    whose content actually varies (layout grids tend to repeat).
    """
    if len(grid) < 2 or len(grid[0]) < 2:
        return False
    if node_context is not None:
        if any(n.tag == "table" and n is not node_context for n in node_context.iter()):
            return False
        if str(node_context.attrs.get("role") or "").lower() == "presentation":
            return False
    cells = [c for row in grid for c in row]
    empty = sum(1 for c in cells if not c.strip())
    if empty / len(cells) > 0.5:
        return False
    if statistics.median(len(c) for c in cells) > 100:
        return False
    varied_cols = sum(
        1 for j in range(len(grid[0]))
        if len({row[j] for row in grid}) >= 2
    )
    return varied_cols >= 2


def detect_subject_column(grid, column_names=None):
    """Leftmost non-numeric column with >= 80% distinct values, falling back
    to the leftmost non-numeric column; None when all columns are numeric."""
    if not grid or not grid[0]:
        return None
    n_cols = len(grid[0])
    non_numeric = [
        j for j in range(n_cols)
        if not is_numeric_column([row[j] for row in grid])
    ]
    if not non_numeric:
        return None
    for j in non_numeric:
        if distinct_fraction([row[j] for row in grid]) >= 0.8:
            return j
    return non_numeric[0]


def _headings_chain(dom, table_node):
    """Nearest preceding h2, then h3 after it, then h4 after that."""
    chain = []
    floor = -1
    for tag in ("h2", "h3", "h4"):
        best = None
        for node in dom.find_all(tag):
            if node.end <= table_node.start and node.start > floor:
                best = node
        if best is not None:
            chain.append(_norm(best.text_content()))
            floor = best.start
    return chain


def _preceding_block_text(table_node):
    parent = table_node.parent
    if parent is None:
        return ""
    siblings = parent.children
    idx = siblings.index(table_node)
    for node in reversed(siblings[:idx]):
        if node.is_element and node.tag in _PRECEDING_BLOCK_TAGS:
            return _norm(node.text_content())[:MAX_PRECEDING_TEXT]
    return ""


def extract_metadata(dom, table_node, url=""):
    """Collect the table's page- and position-level context."""
    meta = TableMetadata(url=url)
    title = dom.find("title")
    if title is not None:
        meta.page_title = _norm(title.text_content())
    h1 = dom.find("h1")
    if h1 is not None:
        meta.h1_heading = _norm(h1.text_content())
    meta.section_headings = _headings_chain(dom, table_node)
    meta.preceding_text = _preceding_block_text(table_node)
    for node in table_node.iter():
        if node.tag == "caption" and _nearest_table(node) is table_node:
            meta.caption = _norm(node.text_content())
            break
    grid, header, footer = _build_grid(table_node)
    meta.header_row = header
    meta.footer_row = footer
    if header is not None:
        width = len(grid[0]) if grid else len(header)
        names = list(header[:width])
        names.extend([""] * (width - len(names)))
        meta.column_names = names
    return meta


def _removal_spans(dom):
    """Byte spans of script elements, style elements and comments, merged."""
    spans = []
    for node in dom.iter():
        if node.tag in ("script", "style", "#comment"):
            spans.append((node.start, node.end))
    spans.sort()
    merged = []
    for start, end in spans:
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def _clean_len(spans, start, end):
    """Length of [start, end) minus its overlap with the removal spans."""
    length = end - start
    for s, e in spans:
        length -= max(0, min(e, end) - max(s, start))
    return length


def _lca(a, b):
    seen = {id(a)}
    seen.update(id(n) for n in a.ancestors())
    if id(b) in seen:
        return b
    for node in b.ancestors():
        if id(node) in seen:
            return node
    return None


def _clamp01(x):
    return min(max(x, 0.0), 1.0)


def compute_dominance(dom, source, table_node):
    """Byte-ratio dominance of a table, in three scopes.

    ``frac_raw``/``pos_raw`` are measured on the raw source bytes.  The
    cleaned variants first drop all script elements, style elements and
    comments.  The main variants restrict the cleaned measurement to the
    main content container: the lowest common ancestor of the document's
    first h1 and the table (the whole cleaned document when there is no h1).
    All six values are clamped to [0, 1].
    """
    total = len(source.encode("utf-8"))
    feats = DominanceFeatures()
    if total == 0:
        return feats
    spans = _removal_spans(dom)
    table_len = table_node.end - table_node.start

    feats.frac_raw = _clamp01(table_len / total)
    feats.pos_raw = _clamp01(table_node.start / total)

    cleaned_total = _clean_len(spans, 0, total)
    if cleaned_total > 0:
        feats.frac_cleaned = _clamp01(
            _clean_len(spans, table_node.start, table_node.end) / cleaned_total)
        feats.pos_cleaned = _clamp01(_clean_len(spans, 0, table_node.start) / cleaned_total)

    h1 = dom.find("h1")
    container = _lca(h1, table_node) if h1 is not None else dom.root
    if container is None:
        container = dom.root
    container_len = _clean_len(spans, container.start, container.end)
    if container_len > 0:
        feats.frac_main = _clamp01(
            _clean_len(spans, table_node.start, table_node.end) / container_len)
        feats.pos_main = _clamp01(
            _clean_len(spans, container.start, table_node.start) / container_len)
    return feats


def extract_candidate_tables(dom, url="", doc_rank=1):
    """All relational tables of a document, in source order.

    ``table_index`` numbers the returned tables consecutively from 1.  When
    tables nest, only the innermost grid-bearing table qualifies (outer
    tables fail the nested-table heuristic).
    """
    if doc_rank < 1:
        raise ValueError("doc_rank must be >= 1")
    if isinstance(dom, str):
        dom = parse_html(dom)
    out = []
    for node in dom.iter():
        if node.tag != "table":
            continue
        grid, _header, _footer = _build_grid(node)
        if not is_relational(grid, node):
            continue
        meta = extract_metadata(dom, node, url)
        dominance = compute_dominance(dom, dom.source, node)
        dominance.table_index = len(out) + 1
        out.append(ExtractedTable(
            grid=grid,
            metadata=meta,
            subject_col=detect_subject_column(grid, meta.column_names),
            doc_rank=doc_rank,
            table_index=len(out) + 1,
            dominance=dominance,
        ))
    return out
