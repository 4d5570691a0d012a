"""Walk through candidate table extraction on a single HTML page.

The page below carries three <table> elements: a navigation strip, a
relational roster and a tiny two-cell layout grid.  Only the roster
should survive the relational filters, and its dominance numbers should
reflect how much of the page it occupies.

Run:  python3 demos/extract_tables.py
"""

from tableanswer.extraction import extract_candidate_tables

PAGE = """
<html>
<head><title>Ski resorts of the Alps</title></head>
<body>
<h1>Alpine ski resorts</h1>

<table><tr>
  <td><a href="/">home</a></td>
  <td><a href="/about">about</a></td>
  <td><a href="/contact">contact</a></td>
</tr></table>

<h2>Resort comparison</h2>
<p>Vertical drop and lift counts for the season.</p>

<table>
  <caption>Major resorts, 2024 season</caption>
  <thead><tr><th>Resort</th><th>Country</th><th>Lifts</th><th>Drop (m)</th></tr></thead>
  <tbody>
    <tr><td>Zermatt</td><td>Switzerland</td><td>52</td><td>2279</td></tr>
    <tr><td>Chamonix</td><td>France</td><td>49</td><td>2807</td></tr>
    <tr><td>St. Anton</td><td>Austria</td><td>88</td><td>1507</td></tr>
    <tr><td>Cortina</td><td>Italy</td><td>34</td><td>1715</td></tr>
  </tbody>
</table>

<table><tr><td>ad</td><td>ad</td></tr></table>
</body>
</html>
"""


def main():
    tables = extract_candidate_tables(
        PAGE, url="http://example.org/alps/resorts", doc_rank=1)
    print(f"relational tables found: {len(tables)}")

    for table in tables:
        meta = table.metadata
        print()
        print(f"table_index={table.table_index}  "
              f"{table.n_rows} rows x {table.n_cols} cols")
        print(f"  page title:   {meta.page_title!r}")
        print(f"  h1:           {meta.h1_heading!r}")
        print(f"  sections:     {meta.section_headings}")
        print(f"  caption:      {meta.caption!r}")
        print(f"  column names: {meta.column_names}")
        print(f"  subject col:  {table.subject_col} "
              f"({meta.column_names[table.subject_col]!r})"
              if table.subject_col is not None else "  subject col:  none")

        d = table.dominance
        print("  dominance (fraction of page bytes, table offset):")
        print(f"    raw page:     {d.frac_raw:.3f} at {d.pos_raw:.3f}")
        print(f"    cleaned page: {d.frac_cleaned:.3f} at {d.pos_cleaned:.3f}")
        print(f"    main block:   {d.frac_main:.3f} at {d.pos_main:.3f}")

        print("  grid:")
        for row in table.grid:
            print("    " + " | ".join(row))


if __name__ == "__main__":
    main()
