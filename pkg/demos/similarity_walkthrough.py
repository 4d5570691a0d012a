"""Show how one table becomes documents and how each scorer reads them.

A table answering "tallest buildings in dubai" is mapped to documents
three ways: one combined bag, a metadata/content split, and the full
metadata/content/subject split.  Each mapping is then scored against two
queries with the three similarity models so the differences are visible:

* word matching rewards literal overlap and nothing else,
* the translation model, trained on a few click pairs, also rewards
  words it has learned to associate ("skyscraper" with "building"),
* the semantic model embeds letter trigrams, so it tolerates morphology
  ("buildings" vs "building") even with this toy amount of training.

Run:  python3 demos/similarity_walkthrough.py
"""

from tableanswer.bm25 import bm25, corpus_stats
from tableanswer.cdssm import cdssm_similarity, cdssm_train
from tableanswer.docmap import Strategy, build_documents, tokenize
from tableanswer.extraction import extract_candidate_tables
from tableanswer.translation import tm_score, tm_train

PAGE = """
<html><head><title>Tallest buildings in Dubai</title></head><body>
<h1>Dubai skyscrapers</h1>
<table>
<thead><tr><th>Building</th><th>Height (m)</th><th>Year</th></tr></thead>
<tbody>
<tr><td>Burj Khalifa</td><td>828</td><td>2010</td></tr>
<tr><td>Marina 101</td><td>425</td><td>2017</td></tr>
<tr><td>Princess Tower</td><td>413</td><td>2012</td></tr>
</tbody>
</table>
</body></html>
"""

# a handful of (query, clicked document) pairs; enough for the learned
# models to pick up "skyscraper <-> building" style associations
CLICK_PAIRS = [
    (tokenize("tallest buildings in dubai"),
     tokenize("dubai skyscrapers building height burj khalifa")),
    (tokenize("tallest skyscraper list"),
     tokenize("building height tower skyscrapers")),
    (tokenize("dubai tower heights"),
     tokenize("dubai building tower height metres")),
    (tokenize("burj khalifa height"),
     tokenize("burj khalifa tallest building dubai")),
    (tokenize("princess tower dubai"),
     tokenize("princess tower dubai marina skyscrapers")),
]

QUERIES = ["tallest buildings in dubai", "skyscraper heights"]


def main():
    table = extract_candidate_tables(
        PAGE, url="http://example.org/dubai/towers", doc_rank=1)[0]

    for strategy in (Strategy.SINGLE, Strategy.MDOC_CDOC, Strategy.MDOC_CDOC_SDOC):
        print(f"strategy {strategy.value}:")
        for kind, doc in build_documents(table, strategy):
            shown = " ".join(doc[:12]) + (" ..." if len(doc) > 12 else "")
            print(f"  {kind:5s} ({len(doc):2d} tokens)  {shown}")
        print()

    # score against the full split; corpus statistics come from the same
    # documents since this demo has just the one table
    strategy = Strategy.MDOC_CDOC_SDOC
    docs = build_documents(table, strategy)
    stats = corpus_stats([doc for _, doc in docs])

    tm = tm_train(CLICK_PAIRS, iterations=15)
    sem = cdssm_train(CLICK_PAIRS, d_l=400, d_conv=16, d_sem=8,
                      negatives=2, epochs=30, learning_rate=0.05, seed=0)

    for text in QUERIES:
        query = tokenize(text)
        print(f"query: {text!r}")
        for kind, doc in docs:
            word = bm25(query, doc, stats)
            learned = tm_score(query, doc, tm)
            semantic = cdssm_similarity(query, doc, sem)
            print(f"  {kind:5s}  word={word:7.3f}  "
                  f"translation={learned:8.3f}  semantic={semantic:6.3f}")
        print()


if __name__ == "__main__":
    main()
